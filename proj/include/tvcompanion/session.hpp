#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tvcompanion/dialog.hpp"
#include "tvcompanion/keywords.hpp"
#include "tvcompanion/templates.hpp"
#include "tvcompanion/transcript.hpp"

namespace tvc {

struct SessionConfig {
  double mean_interval_s = 80.0;
  double disclosure_ratio = 0.75;  // 3:1 disclosure:question
  double silence_timeout_s = 15.0;
  int max_no_answer = 2;
  double wmd_threshold = 0.35;
  int cooldown_utterances = 10;
  double min_confidence = 0.5;
  std::uint64_t rng_seed = 1;
  double news_max_age_s = 7 * 86400.0;
  std::optional<double> start_epoch;  // wall-clock anchor for news recency
  std::vector<std::string> end_lexicon = {"bye", "stop", "let's watch", "that's enough"};
  bool log_feed_events = true;  // caption_shown / keyword_extracted entries

  /// Throws ContractError on invariant violations.
  void validate() const;
};

/// Reads overrides from a JSON object onto `base`; unknown keys are rejected.
SessionConfig apply_overrides(SessionConfig base, const nlohmann::json& overrides);
nlohmann::json to_json(const SessionConfig& config);

struct SessionState {
  Mode mode = Mode::TVWatching;
  double clock = 0.0;
  double next_utterance_at = 0.0;
  long long utterance_seq = 0;
  int no_answer_count = 0;
  int conversation_turn = 0;
  std::optional<double> silence_deadline;
  std::uint64_t rng_seed = 0;
};

using Rng = std::mt19937_64;

/// now + an exponential inter-arrival with the given mean, clamped to
/// [1 s, 10 x mean].
double schedule_next(double now, double mean_interval_s, Rng& rng);

/// True for a disclosure, drawn with probability `disclosure_ratio`.
bool draw_disclosure(double disclosure_ratio, Rng& rng);

/// Case-insensitive substring match against the end-intent lexicon.
bool matches_end_intent(std::string_view text, const std::vector<std::string>& lexicon);

struct SessionDeps {
  std::shared_ptr<const EmbeddingStore> store;
  std::shared_ptr<const Tokenizer> tokenizer;
  std::set<std::string> stopwords;
  std::shared_ptr<const TemplateCorpus> templates;
  std::shared_ptr<const DialogManager> dialog;
};

/// The two-mode companion state machine, driven in logical seconds.
///
/// Every public operation taking `now` first fires whatever was due up to
/// `now` (scheduled utterances, silence timeouts), so callers only need to
/// deliver their own events in time order. Each returns the transcript
/// entries it appended. Single-writer: callers serialize access.
class Session {
 public:
  using Sink = std::function<void(const TranscriptEntry&)>;

  Session(SessionConfig config, SessionDeps deps, Sink sink = {});

  std::vector<TranscriptEntry> tick(double now);
  std::vector<TranscriptEntry> ingest(const FeedEvent& event);
  std::vector<TranscriptEntry> on_user_utterance(const std::string& text, double now);
  std::vector<TranscriptEntry> on_silence(double now);
  std::vector<TranscriptEntry> cancel(double now);

  /// Earliest pending timer (utterance or silence deadline) for the driver.
  double next_due() const;

  SessionState state() const;
  const SessionConfig& config() const { return config_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  const KeywordPool& keywords() const { return pool_; }

 private:
  void require_monotone(double now) const;
  void advance(double now);
  void append(TranscriptEntry entry);
  void speak_scheduled(double t);
  void handle_silence(double t);
  void end_conversation(double t, std::string_view cause);
  void enter_conversation(double t, const std::string& question, const std::string& keyword,
                          int template_id);
  TranscriptEntry system_entry(double t, std::string_view event, std::string text) const;

  SessionConfig config_;
  SessionDeps deps_;
  DialogConfig dialog_config_;
  Sink sink_;
  KeywordPool pool_;
  Rng rng_;

  Mode mode_ = Mode::TVWatching;
  double clock_ = 0.0;
  double next_utterance_at_ = 0.0;
  long long utterance_seq_ = 0;
  int no_answer_count_ = 0;
  int conversation_turn_ = 0;
  int conversation_utterances_ = 0;
  std::optional<double> silence_deadline_;
  long long conversation_counter_ = 0;
  std::optional<long long> conversation_id_;
  std::string pending_question_;
  std::string last_robot_text_;
  std::optional<std::string> topic_keyword_;
  bool cancel_armed_ = false;

  std::vector<TranscriptEntry> transcript_;
  std::vector<TranscriptEntry>* collecting_ = nullptr;
};

}  // namespace tvc
