#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvcompanion/embeddings.hpp"
#include "tvcompanion/engine_id.hpp"
#include "tvcompanion/keywords.hpp"

namespace tvc {

enum class TemplateKind { Disclosure, Question };
enum class UtteranceKind { Disclosure, Question, Response };

std::string_view to_string(TemplateKind kind);
std::string_view to_string(UtteranceKind kind);
std::optional<TemplateKind> parse_template_kind(std::string_view text);

inline constexpr std::string_view kSlotMarker = "***";

struct UtteranceTemplate {
  int id = 0;  // 1-based load order; 0 marks a built-in default
  TemplateKind kind = TemplateKind::Disclosure;
  std::string anchor;
  std::string pattern;
};

struct Utterance {
  std::string text;
  UtteranceKind kind = UtteranceKind::Disclosure;
  std::optional<std::string> keyword;
  double produced_at = 0.0;
  std::optional<EngineId> engine;  // set exactly when kind == Response
  int template_id = 0;
};

struct TemplateConfig {
  /// Limit on the pattern with its slot removed, counted in non-whitespace
  /// characters (UTF-8 code points).
  std::size_t max_template_chars = 20;
  std::string default_disclosure = "I am curious about ***";
  std::string default_question = "What do you think about ***";
};

/// Characters counted against max_template_chars.
std::size_t template_length(std::string_view pattern);

class TemplateCorpus {
 public:
  TemplateCorpus(std::vector<UtteranceTemplate> templates, TemplateConfig config = {});

  const std::vector<UtteranceTemplate>& templates() const { return templates_; }
  std::vector<const UtteranceTemplate*> of_kind(TemplateKind kind) const;
  const UtteranceTemplate& default_for(TemplateKind kind) const;
  const TemplateConfig& config() const { return config_; }

 private:
  std::vector<UtteranceTemplate> templates_;
  TemplateConfig config_;
  UtteranceTemplate default_disclosure_;
  UtteranceTemplate default_question_;
};

/// Reads "kind<TAB>anchor<TAB>pattern" records; '#' lines and blank lines are
/// skipped. Bad records are rejected with one warning each. Throws DataError
/// when no record survives.
TemplateCorpus load_templates(std::istream& in, const EmbeddingStore& store,
                              TemplateConfig config = {}, Warnings* warnings = nullptr);
TemplateCorpus load_templates_file(const std::string& path, const EmbeddingStore& store,
                                   TemplateConfig config = {}, Warnings* warnings = nullptr);
void save_templates(const TemplateCorpus& corpus, std::ostream& out);

/// Template of `kind` whose anchor is most cosine-similar to the keyword;
/// ties go to the lowest id. OOV keywords get the default template.
const UtteranceTemplate& select_template(const Keyword& keyword, TemplateKind kind,
                                         const TemplateCorpus& corpus,
                                         const EmbeddingStore& store);

/// Single-pass slot substitution; questions get a trailing '?' when the
/// pattern has none.
Utterance realize(const UtteranceTemplate& tmpl, const Keyword& keyword, double produced_at = 0.0);

}  // namespace tvc
