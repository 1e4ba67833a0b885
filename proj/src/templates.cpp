#include "tvcompanion/templates.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace tvc {

namespace {

std::size_t count_slots(std::string_view pattern) {
  std::size_t count = 0;
  for (std::size_t pos = pattern.find(kSlotMarker); pos != std::string_view::npos;
       pos = pattern.find(kSlotMarker, pos + kSlotMarker.size())) {
    ++count;
  }
  return count;
}

std::string_view rtrim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find('\t', start);
    fields.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return fields;
}

UtteranceTemplate make_default(TemplateKind kind, const std::string& pattern) {
  if (count_slots(pattern) != 1) throw ContractError("default template needs exactly one slot");
  return UtteranceTemplate{0, kind, "", pattern};
}

}  // namespace

std::string_view to_string(TemplateKind kind) {
  return kind == TemplateKind::Disclosure ? "disclosure" : "question";
}

std::string_view to_string(UtteranceKind kind) {
  switch (kind) {
    case UtteranceKind::Disclosure: return "disclosure";
    case UtteranceKind::Question: return "question";
    case UtteranceKind::Response: return "response";
  }
  return "unknown";
}

std::optional<TemplateKind> parse_template_kind(std::string_view text) {
  if (text == "disclosure") return TemplateKind::Disclosure;
  if (text == "question") return TemplateKind::Question;
  return std::nullopt;
}

std::size_t template_length(std::string_view pattern) {
  std::size_t count = 0;
  std::size_t slot = pattern.find(kSlotMarker);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (slot != std::string_view::npos && i >= slot && i < slot + kSlotMarker.size()) continue;
    auto c = static_cast<unsigned char>(pattern[i]);
    if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
    if (c < 0x80 && std::isspace(c)) continue;
    ++count;
  }
  return count;
}

TemplateCorpus::TemplateCorpus(std::vector<UtteranceTemplate> templates, TemplateConfig config)
    : templates_(std::move(templates)),
      config_(std::move(config)),
      default_disclosure_(make_default(TemplateKind::Disclosure, config_.default_disclosure)),
      default_question_(make_default(TemplateKind::Question, config_.default_question)) {
  for (const auto& t : templates_) {
    if (count_slots(t.pattern) != 1) throw ContractError("template needs exactly one slot marker");
  }
}

std::vector<const UtteranceTemplate*> TemplateCorpus::of_kind(TemplateKind kind) const {
  std::vector<const UtteranceTemplate*> out;
  for (const auto& t : templates_) {
    if (t.kind == kind) out.push_back(&t);
  }
  return out;
}

const UtteranceTemplate& TemplateCorpus::default_for(TemplateKind kind) const {
  return kind == TemplateKind::Disclosure ? default_disclosure_ : default_question_;
}

TemplateCorpus load_templates(std::istream& in, const EmbeddingStore& store, TemplateConfig config,
                              Warnings* warnings) {
  std::vector<UtteranceTemplate> accepted;
  std::string line;
  std::size_t line_no = 0;
  auto reject = [&](const std::string& why) {
    if (warnings) warnings->push_back("template line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      reject("expected 3 tab-separated fields");
      continue;
    }
    auto kind = parse_template_kind(fields[0]);
    if (!kind) {
      reject("unknown kind '" + fields[0] + "'");
      continue;
    }
    if (!store.contains(fields[1])) {
      reject("anchor '" + fields[1] + "' is not in the vocabulary");
      continue;
    }
    std::size_t slots = count_slots(fields[2]);
    if (slots != 1) {
      reject("pattern must contain exactly one slot marker, found " + std::to_string(slots));
      continue;
    }
    std::size_t length = template_length(fields[2]);
    if (length > config.max_template_chars) {
      reject("pattern has " + std::to_string(length) + " characters, limit is " +
             std::to_string(config.max_template_chars));
      continue;
    }
    accepted.push_back({static_cast<int>(accepted.size()) + 1, *kind, fields[1], fields[2]});
  }
  if (in.bad()) throw DataError("error reading template source");
  if (accepted.empty()) throw DataError("no valid templates loaded");
  return TemplateCorpus(std::move(accepted), std::move(config));
}

TemplateCorpus load_templates_file(const std::string& path, const EmbeddingStore& store,
                                   TemplateConfig config, Warnings* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template file: " + path);
  return load_templates(in, store, std::move(config), warnings);
}

void save_templates(const TemplateCorpus& corpus, std::ostream& out) {
  for (const auto& t : corpus.templates()) {
    out << to_string(t.kind) << '\t' << t.anchor << '\t' << t.pattern << '\n';
  }
}

const UtteranceTemplate& select_template(const Keyword& keyword, TemplateKind kind,
                                         const TemplateCorpus& corpus,
                                         const EmbeddingStore& store) {
  auto candidates = corpus.of_kind(kind);
  if (candidates.empty()) {
    throw ContractError("template corpus has no " + std::string(to_string(kind)) + " templates");
  }
  const std::string key = vocab_key(keyword.surface, store);
  if (key.empty()) return corpus.default_for(kind);

  const auto keyword_vec = store.vector(key);
  const UtteranceTemplate* best = nullptr;
  double best_score = 0.0;
  for (const auto* t : candidates) {
    double score = cosine_similarity(keyword_vec, store.vector(t->anchor));
    if (!best || score > best_score || (score == best_score && t->id < best->id)) {
      best = t;
      best_score = score;
    }
  }
  return *best;
}

Utterance realize(const UtteranceTemplate& tmpl, const Keyword& keyword, double produced_at) {
  if (keyword.surface.empty()) throw ContractError("cannot realize an empty keyword");
  const std::size_t slot = tmpl.pattern.find(kSlotMarker);
  if (slot == std::string::npos) throw ContractError("template has no slot marker");

  Utterance u;
  u.text = tmpl.pattern.substr(0, slot) + keyword.surface +
           tmpl.pattern.substr(slot + kSlotMarker.size());
  if (tmpl.kind == TemplateKind::Question) {
    u.kind = UtteranceKind::Question;
    if (rtrim(tmpl.pattern).empty() || rtrim(tmpl.pattern).back() != '?') {
      u.text = std::string(rtrim(u.text)) + "?";
    }
  } else {
    u.kind = UtteranceKind::Disclosure;
  }
  u.keyword = keyword.surface;
  u.produced_at = produced_at;
  u.template_id = tmpl.id;
  return u;
}

}  // namespace tvc
