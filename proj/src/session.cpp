#include "tvcompanion/session.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tvcompanion/hashing.hpp"

namespace tvc {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Collects entries appended during one public call.
class Collector {
 public:
  Collector(std::vector<TranscriptEntry>*& slot) : slot_(slot) { slot_ = &entries_; }
  ~Collector() { slot_ = nullptr; }
  std::vector<TranscriptEntry> take() { return std::move(entries_); }

 private:
  std::vector<TranscriptEntry>*& slot_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace

void SessionConfig::validate() const {
  if (!(mean_interval_s > 0.0) || !std::isfinite(mean_interval_s)) {
    throw ContractError("mean_interval_s must be > 0");
  }
  if (!(disclosure_ratio > 0.0 && disclosure_ratio < 1.0)) {
    throw ContractError("disclosure_ratio must be in (0, 1)");
  }
  if (!(silence_timeout_s > 0.0)) throw ContractError("silence_timeout_s must be > 0");
  if (max_no_answer < 0) throw ContractError("max_no_answer must be >= 0");
  if (cooldown_utterances < 0) throw ContractError("cooldown_utterances must be >= 0");
  if (!(wmd_threshold >= 0.0 && wmd_threshold <= 1.0)) {
    throw ContractError("wmd_threshold must be in [0, 1]");
  }
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw ContractError("min_confidence must be in [0, 1]");
  }
  if (!(news_max_age_s >= 0.0)) throw ContractError("news_max_age_s must be >= 0");
}

SessionConfig apply_overrides(SessionConfig c, const nlohmann::json& o) {
  if (o.is_null()) return c;
  if (!o.is_object()) throw ContractError("config overrides must be a JSON object");
  try {
    for (const auto& [key, value] : o.items()) {
      if (key == "mean_interval_s") c.mean_interval_s = value.get<double>();
      else if (key == "disclosure_ratio") c.disclosure_ratio = value.get<double>();
      else if (key == "silence_timeout_s") c.silence_timeout_s = value.get<double>();
      else if (key == "max_no_answer") c.max_no_answer = value.get<int>();
      else if (key == "wmd_threshold") c.wmd_threshold = value.get<double>();
      else if (key == "cooldown_utterances") c.cooldown_utterances = value.get<int>();
      else if (key == "min_confidence") c.min_confidence = value.get<double>();
      else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
      else if (key == "news_max_age_s") c.news_max_age_s = value.get<double>();
      else if (key == "start_epoch") {
        if (value.is_null()) c.start_epoch.reset();
        else c.start_epoch = value.get<double>();
      }
      else if (key == "end_lexicon") c.end_lexicon = value.get<std::vector<std::string>>();
      else if (key == "log_feed_events") c.log_feed_events = value.get<bool>();
      else throw ContractError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("bad config value: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const SessionConfig& c) {
  nlohmann::json j = {{"mean_interval_s", c.mean_interval_s},
                      {"disclosure_ratio", c.disclosure_ratio},
                      {"silence_timeout_s", c.silence_timeout_s},
                      {"max_no_answer", c.max_no_answer},
                      {"wmd_threshold", c.wmd_threshold},
                      {"cooldown_utterances", c.cooldown_utterances},
                      {"min_confidence", c.min_confidence},
                      {"rng_seed", c.rng_seed},
                      {"news_max_age_s", c.news_max_age_s},
                      {"end_lexicon", c.end_lexicon},
                      {"log_feed_events", c.log_feed_events}};
  j["start_epoch"] = c.start_epoch ? nlohmann::json(*c.start_epoch) : nlohmann::json();
  return j;
}

double schedule_next(double now, double mean_interval_s, Rng& rng) {
  if (!(mean_interval_s > 0.0)) throw ContractError("mean interval must be positive");
  double u = unit_interval(rng());
  double delta = -mean_interval_s * std::log1p(-u);
  double upper = std::max(1.0, 10.0 * mean_interval_s);
  return now + std::clamp(delta, 1.0, upper);
}

bool draw_disclosure(double disclosure_ratio, Rng& rng) {
  return unit_interval(rng()) < disclosure_ratio;
}

bool matches_end_intent(std::string_view text, const std::vector<std::string>& lexicon) {
  const std::string haystack = lower(text);
  return std::any_of(lexicon.begin(), lexicon.end(), [&](const std::string& entry) {
    return !entry.empty() && haystack.find(lower(entry)) != std::string::npos;
  });
}

Session::Session(SessionConfig config, SessionDeps deps, Sink sink)
    : config_(std::move(config)),
      deps_(std::move(deps)),
      sink_(std::move(sink)),
      pool_(deps_.store, deps_.tokenizer, deps_.stopwords,
            KeywordConfig{config_.min_confidence, config_.cooldown_utterances}),
      rng_(config_.rng_seed) {
  config_.validate();
  if (!deps_.templates || !deps_.dialog) throw ContractError("session needs templates and a dialog manager");
  dialog_config_ = deps_.dialog->config();
  dialog_config_.wmd_threshold = config_.wmd_threshold;
  dialog_config_.news_max_age_s = config_.news_max_age_s;
  dialog_config_.reference_time = config_.start_epoch;
  next_utterance_at_ = schedule_next(0.0, config_.mean_interval_s, rng_);
}

SessionState Session::state() const {
  return SessionState{mode_,           clock_,           next_utterance_at_, utterance_seq_,
                      no_answer_count_, conversation_turn_, silence_deadline_, config_.rng_seed};
}

double Session::next_due() const {
  if (mode_ == Mode::Conversing && silence_deadline_) return *silence_deadline_;
  return next_utterance_at_;
}

void Session::require_monotone(double now) const {
  if (!(now >= clock_)) throw ContractError("session time cannot go backwards");
}

void Session::append(TranscriptEntry entry) {
  transcript_.push_back(entry);
  if (sink_) sink_(transcript_.back());
  if (collecting_) collecting_->push_back(std::move(entry));
}

TranscriptEntry Session::system_entry(double t, std::string_view event, std::string text) const {
  TranscriptEntry e;
  e.t = t;
  e.speaker = Speaker::System;
  e.kind = EntryKind::Event;
  e.event = std::string(event);
  e.text = std::move(text);
  e.conversation_id = conversation_id_;
  return e;
}

void Session::advance(double now) {
  while (true) {
    if (mode_ == Mode::Conversing && silence_deadline_ && *silence_deadline_ <= now) {
      clock_ = *silence_deadline_;
      handle_silence(clock_);
    } else if (mode_ == Mode::TVWatching && next_utterance_at_ <= now) {
      clock_ = next_utterance_at_;
      speak_scheduled(clock_);
    } else {
      break;
    }
  }
  clock_ = now;
}

void Session::speak_scheduled(double t) {
  // Every slot advances the sequence, spoken or not, so cooldowns keep
  // expiring while the pool is exhausted.
  ++utterance_seq_;
  auto keyword = pool_.next_keyword(utterance_seq_);
  if (!keyword) {
    next_utterance_at_ = schedule_next(t, config_.mean_interval_s, rng_);
    return;
  }
  const auto kind = draw_disclosure(config_.disclosure_ratio, rng_) ? TemplateKind::Disclosure
                                                                    : TemplateKind::Question;
  const auto& tmpl = select_template(*keyword, kind, *deps_.templates, *deps_.store);
  Utterance u = realize(tmpl, *keyword, t);

  cancel_armed_ = false;
  if (kind == TemplateKind::Question) {
    enter_conversation(t, u.text, *u.keyword, u.template_id);
    return;
  }
  TranscriptEntry e;
  e.t = t;
  e.speaker = Speaker::Robot;
  e.kind = EntryKind::Disclosure;
  e.text = u.text;
  e.keyword = u.keyword;
  e.seq = utterance_seq_;
  e.template_id = u.template_id;
  append(std::move(e));
  next_utterance_at_ = schedule_next(t, config_.mean_interval_s, rng_);
}

void Session::enter_conversation(double t, const std::string& question, const std::string& keyword,
                                 int template_id) {
  conversation_id_ = ++conversation_counter_;
  TranscriptEntry q;
  q.t = t;
  q.speaker = Speaker::Robot;
  q.kind = EntryKind::Question;
  q.text = question;
  q.keyword = keyword;
  q.seq = utterance_seq_;
  q.template_id = template_id;
  q.conversation_id = conversation_id_;
  append(std::move(q));

  mode_ = Mode::Conversing;
  conversation_turn_ = 1;
  conversation_utterances_ = 1;
  no_answer_count_ = 0;
  pending_question_ = question;
  last_robot_text_ = question;
  topic_keyword_ = keyword;
  silence_deadline_ = t + config_.silence_timeout_s;

  auto changed = system_entry(t, events::kModeChanged, "TVWatching -> Conversing");
  changed.from = Mode::TVWatching;
  changed.to = Mode::Conversing;
  changed.cause = std::string(causes::kQuestion);
  append(std::move(changed));
}

void Session::handle_silence(double t) {
  ++no_answer_count_;
  if (no_answer_count_ > config_.max_no_answer) {
    end_conversation(t, causes::kNoAnswer);
    return;
  }
  ++utterance_seq_;
  ++conversation_utterances_;
  TranscriptEntry e;
  e.t = t;
  e.speaker = Speaker::Robot;
  e.kind = EntryKind::Question;
  e.text = pending_question_;
  e.event = std::string(events::kReask);
  e.keyword = topic_keyword_;
  e.seq = utterance_seq_;
  e.conversation_id = conversation_id_;
  append(std::move(e));
  last_robot_text_ = pending_question_;
  silence_deadline_ = t + config_.silence_timeout_s;
}

void Session::end_conversation(double t, std::string_view cause) {
  auto ended = system_entry(t, events::kConversationEnded,
                            "conversation ended (" + std::string(cause) + ")");
  ended.cause = std::string(cause);
  ended.turns = conversation_utterances_;
  ended.robot_turns = conversation_turn_;
  append(std::move(ended));

  auto changed = system_entry(t, events::kModeChanged, "Conversing -> TVWatching");
  changed.from = Mode::Conversing;
  changed.to = Mode::TVWatching;
  changed.cause = std::string(cause);
  append(std::move(changed));

  mode_ = Mode::TVWatching;
  conversation_turn_ = 0;
  conversation_utterances_ = 0;
  no_answer_count_ = 0;
  silence_deadline_.reset();
  conversation_id_.reset();
  pending_question_.clear();
  topic_keyword_.reset();
  next_utterance_at_ = schedule_next(t, config_.mean_interval_s, rng_);
}

std::vector<TranscriptEntry> Session::tick(double now) {
  require_monotone(now);
  Collector collect(collecting_);
  advance(now);
  return collect.take();
}

std::vector<TranscriptEntry> Session::ingest(const FeedEvent& event) {
  const double t = std::max(clock_, event.t);
  Collector collect(collecting_);
  advance(t);
  auto touched = pool_.ingest(event);
  if (config_.log_feed_events) {
    if (event.kind == FeedKind::Caption) {
      append(system_entry(t, events::kCaptionShown, event.text));
    }
    for (const auto& surface : touched) {
      auto e = system_entry(t, events::kKeywordExtracted, surface);
      e.keyword = surface;
      e.source = std::string(to_string(event.kind == FeedKind::Caption ? KeywordSource::Caption
                                                                       : KeywordSource::Detection));
      append(std::move(e));
    }
  }
  return collect.take();
}

std::vector<TranscriptEntry> Session::on_user_utterance(const std::string& text, double now) {
  require_monotone(now);
  Collector collect(collecting_);
  advance(now);
  if (blank(text)) {
    if (mode_ == Mode::Conversing) handle_silence(now);
    return collect.take();
  }

  TranscriptEntry user;
  user.t = now;
  user.speaker = Speaker::User;
  user.kind = EntryKind::User;
  user.text = text;
  user.conversation_id = conversation_id_;
  append(std::move(user));
  no_answer_count_ = 0;
  cancel_armed_ = false;
  if (mode_ != Mode::Conversing) return collect.take();

  ++conversation_utterances_;
  if (matches_end_intent(text, config_.end_lexicon)) {
    end_conversation(now, causes::kEndIntent);
    return collect.take();
  }

  DialogContext context{conversation_turn_, last_robot_text_, text, topic_keyword_};
  ScoredCandidate reply = deps_.dialog->respond(context, dialog_config_);

  ++utterance_seq_;
  TranscriptEntry r;
  r.t = now;
  r.speaker = Speaker::Robot;
  r.kind = EntryKind::Response;
  r.text = reply.reply;
  r.engine = reply.engine;
  r.similarity = reply.similarity;
  r.seq = utterance_seq_;
  r.turn_index = conversation_turn_;
  r.conversation_id = conversation_id_;
  append(std::move(r));

  last_robot_text_ = reply.reply;
  ++conversation_turn_;
  ++conversation_utterances_;
  silence_deadline_ = now + config_.silence_timeout_s;
  return collect.take();
}

std::vector<TranscriptEntry> Session::on_silence(double now) {
  require_monotone(now);
  Collector collect(collecting_);
  advance(now);
  if (mode_ == Mode::Conversing) handle_silence(now);
  return collect.take();
}

std::vector<TranscriptEntry> Session::cancel(double now) {
  require_monotone(now);
  Collector collect(collecting_);
  advance(now);
  if (cancel_armed_) return collect.take();

  append(system_entry(now, events::kCancelled, "cancelled"));
  if (mode_ == Mode::Conversing) {
    end_conversation(now, causes::kCancel);
  } else {
    next_utterance_at_ = schedule_next(now, config_.mean_interval_s, rng_);
  }
  cancel_armed_ = true;
  return collect.take();
}

}  // namespace tvc
