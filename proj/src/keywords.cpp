#include "tvcompanion/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <json.hpp>

namespace tvc {

namespace {

bool is_separator(unsigned char c) {
  // Bytes >= 0x80 belong to UTF-8 sequences and stay inside words.
  return c < 0x80 && (std::isspace(c) || std::ispunct(c));
}

std::string trim(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size() && std::isspace(static_cast<unsigned char>(text[start]))) ++start;
  std::size_t end = text.size();
  while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(start, end - start));
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(FeedKind kind) {
  return kind == FeedKind::Caption ? "caption" : "detection";
}

std::string_view to_string(KeywordSource source) {
  return source == KeywordSource::Caption ? "caption" : "detection";
}

FeedEvent parse_feed_event(std::string_view json_line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("feed record must be a JSON object");
  if (!j.contains("t") || !j["t"].is_number()) throw DataError("feed record needs numeric 't'");
  if (!j.contains("kind") || !j["kind"].is_string()) throw DataError("feed record needs 'kind'");
  if (!j.contains("text") || !j["text"].is_string()) throw DataError("feed record needs 'text'");

  FeedEvent event;
  event.t = j["t"].get<double>();
  if (!(event.t >= 0.0)) throw DataError("feed timestamp must be >= 0");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "caption") {
    event.kind = FeedKind::Caption;
  } else if (kind == "detection") {
    event.kind = FeedKind::Detection;
  } else {
    throw DataError("unknown feed kind '" + kind + "'");
  }
  event.text = j["text"].get<std::string>();
  if (trim(event.text).empty()) throw DataError("feed text must be non-empty");
  if (event.kind == FeedKind::Detection) {
    event.confidence = j.value("confidence", 1.0);
    if (!(event.confidence >= 0.0 && event.confidence <= 1.0)) {
      throw DataError("detection confidence must be in [0, 1]");
    }
  }
  return event;
}

std::vector<FeedEvent> load_feed(std::istream& in) {
  std::vector<FeedEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      events.push_back(parse_feed_event(line));
    } catch (const DataError& e) {
      throw DataError("feed line " + std::to_string(line_no) + ": " + e.what());
    }
    if (events.size() > 1 && events.back().t < events[events.size() - 2].t) {
      throw DataError("feed line " + std::to_string(line_no) + ": timestamp goes backwards");
    }
  }
  return events;
}

std::vector<FeedEvent> load_feed_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feed file: " + path);
  return load_feed(in);
}

std::vector<std::string> tokenize_default(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_separator(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

DefaultTokenizer::DefaultTokenizer(std::vector<std::string> user_dictionary) {
  for (const auto& entry : user_dictionary) {
    auto parts = tokenize_default(entry);
    if (!parts.empty()) phrases_.push_back(std::move(parts));
  }
  std::stable_sort(phrases_.begin(), phrases_.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

std::vector<std::string> DefaultTokenizer::tokenize(std::string_view text) const {
  auto basic = tokenize_default(text);
  if (phrases_.empty()) return basic;

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < basic.size()) {
    const std::vector<std::string>* hit = nullptr;
    for (const auto& phrase : phrases_) {
      if (phrase.size() <= basic.size() - i &&
          std::equal(phrase.begin(), phrase.end(), basic.begin() + static_cast<std::ptrdiff_t>(i))) {
        hit = &phrase;
        break;
      }
    }
    if (hit && hit->size() > 1) {
      std::string joined = (*hit)[0];
      for (std::size_t k = 1; k < hit->size(); ++k) joined += ' ' + (*hit)[k];
      out.push_back(std::move(joined));
      i += hit->size();
    } else {
      out.push_back(basic[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> load_word_list(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto entry = ascii_lower(trim(line));
    if (!entry.empty()) words.push_back(std::move(entry));
  }
  return words;
}

std::vector<std::string> load_word_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list: " + path);
  return load_word_list(in);
}

KeywordPool::KeywordPool(std::shared_ptr<const EmbeddingStore> store,
                         std::shared_ptr<const Tokenizer> tokenizer,
                         std::set<std::string> stopwords, KeywordConfig config)
    : store_(std::move(store)),
      tokenizer_(std::move(tokenizer)),
      stopwords_(std::move(stopwords)),
      config_(config) {
  if (!store_ || !tokenizer_) throw ContractError("keyword pool needs a store and a tokenizer");
  if (config_.cooldown_utterances < 0) throw ContractError("cooldown must be >= 0");
}

void KeywordPool::upsert(const std::string& surface, KeywordSource source, double t) {
  auto it = keywords_.find(surface);
  if (it != keywords_.end()) {
    ++it->second.occurrences;
    return;
  }
  keywords_.emplace(surface, Keyword{surface, source, t, 1, 0});
}

std::vector<std::string> KeywordPool::ingest(const FeedEvent& event) {
  std::vector<std::string> touched;
  if (event.kind == FeedKind::Detection) {
    if (event.confidence < config_.min_confidence) return touched;
    auto label = trim(event.text);
    if (label.empty() || stopwords_.count(ascii_lower(label))) return touched;
    upsert(label, KeywordSource::Detection, event.t);
    touched.push_back(std::move(label));
    return touched;
  }
  for (auto& token : tokenizer_->tokenize(event.text)) {
    if (stopwords_.count(token) || vocab_key(token, *store_).empty()) continue;
    upsert(token, KeywordSource::Caption, event.t);
    touched.push_back(std::move(token));
  }
  return touched;
}

std::optional<Keyword> KeywordPool::next_keyword(long long current_utterance_seq) {
  Keyword* best = nullptr;
  for (auto& [surface, kw] : keywords_) {
    if (kw.cooldown_until_utterance > current_utterance_seq) continue;
    if (!best) {
      best = &kw;
      continue;
    }
    // Map iteration is lexicographic, so strict comparisons keep the smallest surface.
    if (kw.first_seen > best->first_seen ||
        (kw.first_seen == best->first_seen && kw.occurrences > best->occurrences)) {
      best = &kw;
    }
  }
  if (!best) return std::nullopt;
  best->cooldown_until_utterance = current_utterance_seq + config_.cooldown_utterances;
  return *best;
}

const Keyword* KeywordPool::find(std::string_view surface) const {
  auto it = keywords_.find(surface);
  return it == keywords_.end() ? nullptr : &it->second;
}

std::vector<Keyword> KeywordPool::snapshot() const {
  std::vector<Keyword> out;
  out.reserve(keywords_.size());
  for (const auto& [surface, kw] : keywords_) out.push_back(kw);
  return out;
}

}  // namespace tvc
