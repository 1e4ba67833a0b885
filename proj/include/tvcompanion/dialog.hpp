#pragma once

#include <chrono>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tvcompanion/embeddings.hpp"
#include "tvcompanion/engine_id.hpp"
#include "tvcompanion/keywords.hpp"

namespace tvc {

struct DialogContext {
  int turn_index = 1;
  std::string last_robot_utterance;
  std::string last_user_utterance;
  std::optional<std::string> topic_keyword;
};

/// A retrievable exchange: `cue` is matched against the context, `reply` is spoken.
struct CorpusEntry {
  std::string cue;
  std::string reply;
  std::optional<double> timestamp;  // epoch seconds
};

class DialogEngine {
 public:
  virtual ~DialogEngine() = default;
  virtual EngineId id() const = 0;
  virtual std::vector<CorpusEntry> candidates(const DialogContext& context) const = 0;
};

/// Fixed corpus; every entry is a candidate regardless of context.
class RetrievalEngine final : public DialogEngine {
 public:
  RetrievalEngine(EngineId id, std::vector<CorpusEntry> corpus);

  EngineId id() const override { return id_; }
  std::vector<CorpusEntry> candidates(const DialogContext&) const override { return corpus_; }
  std::size_t size() const { return corpus_.size(); }

 private:
  EngineId id_;
  std::vector<CorpusEntry> corpus_;
};

/// JSON-lines records {cue, reply, timestamp?}. Throws DataError with the line number.
std::vector<CorpusEntry> load_corpus(std::istream& in);
std::vector<CorpusEntry> load_corpus_file(const std::string& path);

class GenerativeEngine {
 public:
  virtual ~GenerativeEngine() = default;
  virtual std::string reply(const DialogContext& context) const = 0;
};

/// Deterministic acknowledgment picked by a polynomial hash of the user's
/// last utterance. The empty string hashes to 0, selecting the first entry.
class BuiltinGenerative final : public GenerativeEngine {
 public:
  BuiltinGenerative();
  explicit BuiltinGenerative(std::vector<std::string> replies);

  std::string reply(const DialogContext& context) const override;
  const std::vector<std::string>& replies() const { return replies_; }

 private:
  std::vector<std::string> replies_;
};

/// POSTs {"context_text": ...} to an HTTP endpoint and expects {"reply": ...}.
/// Any failure, including the timeout, falls back to the builtin engine.
class ExternalGenerative final : public GenerativeEngine {
 public:
  ExternalGenerative(std::string url, std::shared_ptr<const GenerativeEngine> fallback,
                     std::chrono::milliseconds timeout = std::chrono::seconds(2));

  std::string reply(const DialogContext& context) const override;

 private:
  std::string base_;
  std::string path_;
  std::shared_ptr<const GenerativeEngine> fallback_;
  std::chrono::milliseconds timeout_;
};

std::uint64_t reply_hash(std::string_view text);

struct DialogConfig {
  double wmd_threshold = 0.35;         // similarity units
  double news_max_age_s = 7 * 86400.0;
  std::optional<double> reference_time;  // session start, epoch seconds
  std::size_t candidate_cap = 50;      // per engine, by relaxed lower bound
  bool prune = true;
};

struct ScoredCandidate {
  std::string reply;
  EngineId engine = EngineId::Generative;
  // Present for retrieval replies; similarity == to_similarity(distance).
  std::optional<double> similarity;
  std::optional<double> distance;
  std::optional<std::string> cue;
  std::optional<std::size_t> candidate_index;
  // Best retrieval similarity when the generative fallback was taken.
  std::optional<double> best_retrieval_similarity;
};

/// Engines unlocked at a conversation turn: 1 -> tv_program,
/// 2 -> +daily_life, >= 3 -> +news_sns. Generative is never listed.
std::vector<EngineId> available_engines(int turn_index);

/// Topic-linked conversation manager. Immutable after construction; respond()
/// may be called concurrently.
class DialogManager {
 public:
  DialogManager(std::shared_ptr<const EmbeddingStore> store,
                std::shared_ptr<const Tokenizer> tokenizer,
                std::map<EngineId, std::shared_ptr<const DialogEngine>> engines,
                std::shared_ptr<const GenerativeEngine> generative, DialogConfig config = {});

  ScoredCandidate respond(const DialogContext& context) const;
  ScoredCandidate respond(const DialogContext& context, const DialogConfig& config) const;

  const DialogConfig& config() const { return config_; }

 private:
  ScoredCandidate fallback(const DialogContext& context, std::optional<double> best) const;

  std::shared_ptr<const EmbeddingStore> store_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::map<EngineId, std::shared_ptr<const DialogEngine>> engines_;
  std::shared_ptr<const GenerativeEngine> generative_;
  DialogConfig config_;
};

}  // namespace tvc
