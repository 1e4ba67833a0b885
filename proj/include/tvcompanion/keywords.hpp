#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tvcompanion/embeddings.hpp"

namespace tvc {

enum class FeedKind { Caption, Detection };
enum class KeywordSource { Caption, Detection };

std::string_view to_string(FeedKind kind);
std::string_view to_string(KeywordSource source);

struct FeedEvent {
  FeedKind kind = FeedKind::Caption;
  std::string text;          // caption text or detection label
  double confidence = 1.0;   // captions are always 1
  double t = 0.0;            // seconds from session start
};

/// One JSON object per line: {t, kind: "caption"|"detection", text, confidence?}.
/// Blank lines are skipped. Throws DataError with the line number on bad
/// records or when timestamps go backwards.
std::vector<FeedEvent> load_feed(std::istream& in);
std::vector<FeedEvent> load_feed_file(const std::string& path);
FeedEvent parse_feed_event(std::string_view json_line);

/// Word segmentation. Implementations must be deterministic and must not
/// emit empty tokens.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

/// Lowercases ASCII, splits on whitespace and ASCII punctuation, then merges
/// user-dictionary phrases (longest match first) into single tokens joined
/// by one space. Non-ASCII bytes are treated as word characters.
class DefaultTokenizer final : public Tokenizer {
 public:
  DefaultTokenizer() = default;
  explicit DefaultTokenizer(std::vector<std::string> user_dictionary);

  std::vector<std::string> tokenize(std::string_view text) const override;

 private:
  // Each entry pre-split into basic tokens, longest first.
  std::vector<std::vector<std::string>> phrases_;
};

std::vector<std::string> tokenize_default(std::string_view text);

/// One entry per line; blank lines and surrounding whitespace ignored.
/// Entries are lowercased. An empty file yields an empty list.
std::vector<std::string> load_word_list(std::istream& in);
std::vector<std::string> load_word_list_file(const std::string& path);

struct KeywordConfig {
  double min_confidence = 0.5;
  int cooldown_utterances = 10;
};

struct Keyword {
  std::string surface;
  KeywordSource source = KeywordSource::Caption;
  double first_seen = 0.0;
  int occurrences = 1;
  long long cooldown_until_utterance = 0;
};

/// Candidate keywords for one session. Not thread-safe; owned by the
/// session loop.
class KeywordPool {
 public:
  KeywordPool(std::shared_ptr<const EmbeddingStore> store,
              std::shared_ptr<const Tokenizer> tokenizer, std::set<std::string> stopwords,
              KeywordConfig config = {});

  /// Returns the surfaces upserted by this event (empty when filtered out).
  std::vector<std::string> ingest(const FeedEvent& event);

  /// Highest-priority keyword whose cooldown has expired at `current_utterance_seq`;
  /// stamps its cooldown. Priority: latest first_seen, then more occurrences,
  /// then lexicographically smallest surface.
  std::optional<Keyword> next_keyword(long long current_utterance_seq);

  const Keyword* find(std::string_view surface) const;
  std::size_t size() const { return keywords_.size(); }
  std::vector<Keyword> snapshot() const;
  const KeywordConfig& config() const { return config_; }

 private:
  void upsert(const std::string& surface, KeywordSource source, double t);

  std::shared_ptr<const EmbeddingStore> store_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::set<std::string> stopwords_;
  KeywordConfig config_;
  std::map<std::string, Keyword, std::less<>> keywords_;
};

}  // namespace tvc
