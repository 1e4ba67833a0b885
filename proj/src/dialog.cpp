#include "tvcompanion/dialog.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <tuple>

#include <httplib.h>
#include <json.hpp>

#include "tvcompanion/wmd.hpp"

namespace tvc {

namespace {

struct Scored {
  double lower_bound;
  EngineId engine;
  std::size_t index;
  const CorpusEntry* entry;
  WeightedDoc doc;
};

std::optional<WeightedDoc> try_nbow(const std::vector<std::string>& tokens,
                                    const EmbeddingStore& store) {
  std::vector<std::string> keys;
  keys.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto key = vocab_key(token, store);
    if (!key.empty()) keys.push_back(std::move(key));
  }
  if (keys.empty()) return std::nullopt;
  return nbow(keys, store);
}

}  // namespace

RetrievalEngine::RetrievalEngine(EngineId id, std::vector<CorpusEntry> corpus)
    : id_(id), corpus_(std::move(corpus)) {
  if (id == EngineId::Generative) throw ContractError("generative is not a retrieval engine");
  for (const auto& entry : corpus_) {
    if (entry.reply.empty()) throw ContractError("corpus replies must be non-empty");
  }
}

std::vector<CorpusEntry> load_corpus(std::istream& in) {
  std::vector<CorpusEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return DataError("corpus line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw fail("invalid JSON");
    }
    if (!j.is_object() || !j.contains("cue") || !j["cue"].is_string() || !j.contains("reply") ||
        !j["reply"].is_string()) {
      throw fail("expected {cue: string, reply: string, timestamp?: number}");
    }
    CorpusEntry entry{j["cue"].get<std::string>(), j["reply"].get<std::string>(), std::nullopt};
    if (entry.reply.empty()) throw fail("empty reply");
    if (j.contains("timestamp") && !j["timestamp"].is_null()) {
      if (!j["timestamp"].is_number()) throw fail("timestamp must be a number");
      entry.timestamp = j["timestamp"].get<double>();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<CorpusEntry> load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return load_corpus(in);
}

std::uint64_t reply_hash(std::string_view text) {
  std::uint64_t h = 0;
  for (unsigned char c : text) h = h * 131 + c;
  return h;
}

BuiltinGenerative::BuiltinGenerative()
    : BuiltinGenerative({"I see.", "Is that so?", "Tell me more."}) {}

BuiltinGenerative::BuiltinGenerative(std::vector<std::string> replies)
    : replies_(std::move(replies)) {
  if (replies_.empty()) throw ContractError("generative reply list is empty");
  for (const auto& r : replies_) {
    if (r.empty()) throw ContractError("generative replies must be non-empty");
  }
}

std::string BuiltinGenerative::reply(const DialogContext& context) const {
  return replies_[reply_hash(context.last_user_utterance) % replies_.size()];
}

ExternalGenerative::ExternalGenerative(std::string url,
                                       std::shared_ptr<const GenerativeEngine> fallback,
                                       std::chrono::milliseconds timeout)
    : fallback_(std::move(fallback)), timeout_(timeout) {
  if (!fallback_) throw ContractError("external generative engine needs a fallback");
  auto scheme = url.find("://");
  auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::string ExternalGenerative::reply(const DialogContext& context) const {
  try {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    nlohmann::json body = {
        {"context_text", context.last_robot_utterance + " " + context.last_user_utterance}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (res && res->status == 200) {
      auto j = nlohmann::json::parse(res->body);
      if (j.contains("reply") && j["reply"].is_string()) {
        auto text = j["reply"].get<std::string>();
        if (!text.empty()) return text;
      }
    }
  } catch (const std::exception&) {
    // fall through to the builtin reply
  }
  return fallback_->reply(context);
}

std::vector<EngineId> available_engines(int turn_index) {
  if (turn_index < 1) throw ContractError("turn index must be >= 1");
  if (turn_index == 1) return {EngineId::TvProgram};
  if (turn_index == 2) return {EngineId::TvProgram, EngineId::DailyLife};
  return {EngineId::TvProgram, EngineId::DailyLife, EngineId::NewsSns};
}

DialogManager::DialogManager(std::shared_ptr<const EmbeddingStore> store,
                             std::shared_ptr<const Tokenizer> tokenizer,
                             std::map<EngineId, std::shared_ptr<const DialogEngine>> engines,
                             std::shared_ptr<const GenerativeEngine> generative,
                             DialogConfig config)
    : store_(std::move(store)),
      tokenizer_(std::move(tokenizer)),
      engines_(std::move(engines)),
      generative_(std::move(generative)),
      config_(config) {
  if (!store_ || !tokenizer_) throw ContractError("dialog manager needs a store and a tokenizer");
  if (!generative_) throw ContractError("a generative engine must be registered");
  if (engines_.empty()) throw ContractError("no engines registered");
  for (const auto& [id, engine] : engines_) {
    if (!engine || engine->id() != id) throw ContractError("engine registry mismatch");
  }
}

ScoredCandidate DialogManager::respond(const DialogContext& context) const {
  return respond(context, config_);
}

ScoredCandidate DialogManager::fallback(const DialogContext& context,
                                        std::optional<double> best) const {
  ScoredCandidate out;
  out.reply = generative_->reply(context);
  out.engine = EngineId::Generative;
  out.best_retrieval_similarity = best;
  return out;
}

ScoredCandidate DialogManager::respond(const DialogContext& context,
                                       const DialogConfig& config) const {
  auto context_doc =
      try_nbow(tokenizer_->tokenize(context.last_robot_utterance + " " + context.last_user_utterance),
               *store_);
  if (!context_doc) return fallback(context, std::nullopt);

  std::vector<Scored> pool;
  std::vector<std::shared_ptr<std::vector<CorpusEntry>>> held;
  for (EngineId id : available_engines(context.turn_index)) {
    auto it = engines_.find(id);
    if (it == engines_.end()) continue;
    auto entries = std::make_shared<std::vector<CorpusEntry>>(it->second->candidates(context));
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < entries->size(); ++i) {
      const auto& entry = (*entries)[i];
      if (id == EngineId::NewsSns && config.reference_time && entry.timestamp &&
          *entry.timestamp < *config.reference_time - config.news_max_age_s) {
        continue;
      }
      auto doc = try_nbow(tokenizer_->tokenize(entry.cue), *store_);
      if (!doc) continue;
      double lb = relaxed_wmd(*context_doc, *doc, *store_);
      scored.push_back({lb, id, i, &entry, std::move(*doc)});
    }
    if (config.prune && scored.size() > config.candidate_cap) {
      std::stable_sort(scored.begin(), scored.end(),
                       [](const Scored& a, const Scored& b) { return a.lower_bound < b.lower_bound; });
      scored.resize(config.candidate_cap);
    }
    for (auto& s : scored) pool.push_back(std::move(s));
    held.push_back(std::move(entries));  // keeps entry pointers valid
  }

  std::stable_sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
    return std::tie(a.lower_bound, a.engine, a.index) < std::tie(b.lower_bound, b.engine, b.index);
  });

  const Scored* best = nullptr;
  double best_distance = 0.0;
  for (const auto& cand : pool) {
    if (config.prune && best && cand.lower_bound > best_distance) break;
    double d = wmd(*context_doc, cand.doc, *store_).distance;
    if (!best || std::tie(d, cand.engine, cand.index) <
                     std::tie(best_distance, best->engine, best->index)) {
      best = &cand;
      best_distance = d;
    }
  }
  if (!best) return fallback(context, std::nullopt);

  double similarity = to_similarity(best_distance);
  if (similarity < config.wmd_threshold) return fallback(context, similarity);

  ScoredCandidate out;
  out.reply = best->entry->reply;
  out.engine = best->engine;
  out.similarity = similarity;
  out.distance = best_distance;
  out.cue = best->entry->cue;
  out.candidate_index = best->index;
  return out;
}

}  // namespace tvc
