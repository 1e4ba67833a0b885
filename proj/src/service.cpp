#include "tvcompanion/service.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>

namespace tvc {

StreamEvent to_stream_event(const TranscriptEntry& entry, std::size_t cursor) {
  StreamEvent ev{cursor, {}, to_json(entry)};
  ev.data["cursor"] = cursor;
  if (entry.speaker == Speaker::Robot) {
    ev.name = "robot_utterance";
  } else if (entry.speaker == Speaker::User) {
    ev.name = "user_utterance";
  } else {
    ev.name = entry.event.value_or("system");
    if (entry.event == events::kKeywordExtracted && entry.keyword) ev.data["surface"] = *entry.keyword;
  }
  return ev;
}

std::string format_sse(const StreamEvent& event) {
  return "id: " + std::to_string(event.cursor) + "\nevent: " + event.name +
         "\ndata: " + event.data.dump() + "\n\n";
}

// ---------------------------------------------------------------- runner

SessionRunner::SessionRunner(Options options, SessionDeps deps)
    : options_(std::move(options)),
      created_at_(std::chrono::system_clock::now()),
      started_(std::chrono::steady_clock::now()) {
  if (!(options_.speedup > 0.0)) throw ContractError("speedup must be > 0");
  if (!options_.transcript_path.empty()) {
    writer_ = std::make_unique<TranscriptWriter>(options_.transcript_path.string());
  }
  session_ = std::make_unique<Session>(options_.config, std::move(deps),
                                       [this](const TranscriptEntry& e) { on_entry(e); });
  state_ = session_->state();
  thread_ = std::thread([this] { loop(); });
}

SessionRunner::~SessionRunner() {
  {
    std::lock_guard lock(queue_mutex_);
    stop_ = true;
  }
  queue_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void SessionRunner::on_entry(const TranscriptEntry& entry) {
  if (writer_) writer_->append(entry);
  {
    std::lock_guard lock(transcript_mutex_);
    transcript_.push_back(entry);
  }
  transcript_cv_.notify_all();
}

void SessionRunner::enqueue(Command command) {
  {
    std::lock_guard lock(queue_mutex_);
    if (stop_) throw ServiceError(409, "session " + options_.id + " has ended");
    queue_.push_back(std::move(command));
  }
  queue_cv_.notify_all();
}

void SessionRunner::post_user_message(std::string text) { enqueue(UserMessage{std::move(text)}); }
void SessionRunner::post_feed_event(FeedEvent event) { enqueue(std::move(event)); }
void SessionRunner::cancel() { enqueue(Cancel{}); }

void SessionRunner::advance(double seconds) {
  if (options_.clock != ClockMode::Manual) throw ServiceError(409, "session uses the realtime clock");
  if (!(seconds >= 0.0)) throw ServiceError(400, "seconds must be >= 0");
  enqueue(Advance{seconds});
}

void SessionRunner::end() {
  {
    std::lock_guard lock(queue_mutex_);
    if (stop_) throw ServiceError(409, "session " + options_.id + " has already ended");
    queue_.push_back(End{});
    stop_ = true;  // rejects anything posted after the end request
  }
  queue_cv_.notify_all();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

void SessionRunner::sync() {
  std::unique_lock lock(queue_mutex_);
  if (stop_) return;
  const auto ticket = ++sync_issued_;
  queue_.push_back(Sync{ticket});
  queue_cv_.notify_all();
  sync_cv_.wait(lock, [&] { return sync_done_ >= ticket || (stop_ && queue_.empty()); });
}

double SessionRunner::logical_now() const {
  if (options_.clock == ClockMode::Manual) return manual_clock_;
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
  return elapsed.count() * options_.speedup;
}

void SessionRunner::loop() {
  const auto& feed = options_.feed;
  double now = 0.0;

  // Timers and feed events up to `t`, in time order.
  auto drive = [&](double t) {
    while (true) {
      const double t_feed = next_feed_ < feed.size() ? feed[next_feed_].t : t + 1.0;
      const double t_due = session_->next_due();
      if (t_due <= t_feed && t_due <= t) {
        session_->tick(t_due);
      } else if (t_feed <= t) {
        FeedEvent ev = feed[next_feed_++];
        ev.t = std::max(ev.t, session_->state().clock);
        session_->ingest(ev);
      } else {
        break;
      }
    }
    session_->tick(std::max(t, session_->state().clock));
  };

  auto apply = [&](Command& command) -> bool {
    return std::visit(
        [&](auto& c) -> bool {
          using T = std::decay_t<decltype(c)>;
          const double t = std::max(now, session_->state().clock);
          if constexpr (std::is_same_v<T, UserMessage>) {
            session_->on_user_utterance(c.text, t);
          } else if constexpr (std::is_same_v<T, FeedEvent>) {
            c.t = t;
            session_->ingest(c);
          } else if constexpr (std::is_same_v<T, Cancel>) {
            session_->cancel(t);
          } else if constexpr (std::is_same_v<T, Advance>) {
            manual_clock_ += c.seconds;
            now = manual_clock_;
            drive(now);
          } else if constexpr (std::is_same_v<T, End>) {
            return false;
          }
          return true;
        },
        command);
  };

  std::unique_lock lock(queue_mutex_);
  bool running = true;
  while (running) {
    if (queue_.empty() && !stop_) {
      if (options_.clock == ClockMode::Manual) {
        queue_cv_.wait(lock, [&] { return !queue_.empty() || stop_; });
      } else {
        double due = session_->next_due();
        if (next_feed_ < feed.size()) due = std::min(due, feed[next_feed_].t);
        const double wall = std::clamp((due - logical_now()) / options_.speedup, 0.0, 0.5);
        queue_cv_.wait_for(lock, std::chrono::duration<double>(wall),
                           [&] { return !queue_.empty() || stop_; });
      }
    }
    std::deque<Command> batch;
    batch.swap(queue_);
    const bool stopping = stop_;
    lock.unlock();

    now = std::max(logical_now(), now);
    std::uint64_t synced = 0;
    try {
      drive(now);
      for (auto& command : batch) {
        if (auto* s = std::get_if<Sync>(&command)) {
          synced = std::max(synced, s->ticket);
          continue;
        }
        if (!apply(command)) {
          running = false;
          break;
        }
      }
    } catch (const std::exception&) {
      // A contract failure inside the session must not kill the loop.
    }
    if (stopping && running && batch.empty()) running = false;

    {
      std::lock_guard tl(transcript_mutex_);
      state_ = session_->state();
      if (!running) status_ = SessionStatus::Ended;
    }
    transcript_cv_.notify_all();

    lock.lock();
    if (synced) sync_done_ = std::max(sync_done_, synced);
    if (!running) {
      stop_ = true;
      queue_.clear();
      writer_.reset();
    }
    sync_cv_.notify_all();
  }
}

std::pair<std::vector<TranscriptEntry>, bool> SessionRunner::read_from(
    std::size_t cursor, std::chrono::milliseconds wait) {
  std::unique_lock lock(transcript_mutex_);
  transcript_cv_.wait_for(lock, wait, [&] {
    return transcript_.size() > cursor || status_ == SessionStatus::Ended;
  });
  std::vector<TranscriptEntry> out;
  if (cursor < transcript_.size()) out.assign(transcript_.begin() + static_cast<long>(cursor), transcript_.end());
  return {std::move(out), status_ == SessionStatus::Ended};
}

std::vector<TranscriptEntry> SessionRunner::transcript() const {
  std::lock_guard lock(transcript_mutex_);
  return transcript_;
}

SessionStatus SessionRunner::status() const {
  std::lock_guard lock(transcript_mutex_);
  return status_;
}

SessionState SessionRunner::state() const {
  std::lock_guard lock(transcript_mutex_);
  return state_;
}

// ---------------------------------------------------------------- service

namespace {

std::string iso8601(std::chrono::system_clock::time_point tp) {
  const auto t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string random_suffix() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  std::ostringstream s;
  s << std::hex << std::setw(8) << std::setfill('0') << (gen() & 0xffffffffULL);
  return s.str();
}

}  // namespace

nlohmann::json stats_to_json(const TurnStats& stats) {
  nlohmann::json j;
  j["conversation_count"] = stats.conversation_count;
  j["mean"] = stats.mean ? nlohmann::json(*stats.mean) : nlohmann::json(nullptr);
  j["max"] = stats.max;
  j["robot_mean"] = stats.robot_mean ? nlohmann::json(*stats.robot_mean) : nlohmann::json(nullptr);
  j["robot_max"] = stats.robot_max;
  j["conversations"] = nlohmann::json::array();
  for (const auto& c : stats.conversations) {
    j["conversations"].push_back(
        {{"conversation_id", c.conversation_id}, {"turns", c.turns}, {"robot_turns", c.robot_turns}});
  }
  return j;
}

CompanionService::CompanionService(SessionDeps deps, ServiceOptions options)
    : deps_(std::move(deps)), options_(std::move(options)) {
  std::filesystem::create_directories(options_.data_dir);
}

CompanionService::~CompanionService() {
  std::lock_guard lock(mutex_);
  sessions_.clear();
}

nlohmann::json CompanionService::create_session(const nlohmann::json& body) {
  if (!body.is_object()) throw ServiceError(400, "body must be a JSON object");
  SessionRunner::Options opt;

  nlohmann::json overrides = body.value("config", nlohmann::json::object());
  if (!overrides.is_object()) throw ServiceError(400, "config must be an object");
  nlohmann::json speedup = body.value("speedup", nlohmann::json());
  if (overrides.contains("speedup")) {
    speedup = overrides["speedup"];
    overrides.erase("speedup");
  }
  try {
    opt.config = apply_overrides(SessionConfig{}, overrides);
    opt.config.validate();
  } catch (const ContractError& e) {
    throw ServiceError(400, e.what());
  }
  if (!speedup.is_null()) {
    if (!speedup.is_number() || !(speedup.get<double>() > 0.0)) {
      throw ServiceError(400, "speedup must be a positive number");
    }
    opt.speedup = speedup.get<double>();
  }
  const auto clock = body.value("clock", std::string("realtime"));
  if (clock == "manual") opt.clock = ClockMode::Manual;
  else if (clock != "realtime") throw ServiceError(400, "clock must be 'realtime' or 'manual'");

  if (!body.contains("feed")) throw ServiceError(400, "missing feed");
  const auto& feed = body["feed"];
  try {
    if (feed.is_object() && feed.contains("file")) {
      const auto path = feed["file"].get<std::string>();
      if (!std::filesystem::exists(path)) throw ServiceError(400, "feed file not found: " + path);
      opt.feed = load_feed_file(path);
    } else if (feed.is_object() && feed.contains("inline")) {
      const auto& records = feed["inline"];
      if (!records.is_array()) throw ServiceError(400, "feed.inline must be an array");
      for (const auto& r : records) {
        opt.feed.push_back(parse_feed_event(r.dump()));
        if (opt.feed.size() > 1 && opt.feed.back().t < opt.feed[opt.feed.size() - 2].t) {
          throw ServiceError(400, "feed timestamps go backwards");
        }
      }
    } else {
      throw ServiceError(400, "feed must be {\"inline\": [...]} or {\"file\": path}");
    }
  } catch (const DataError& e) {
    throw ServiceError(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(400, e.what());
  }

  std::shared_ptr<SessionRunner> runner;
  {
    std::lock_guard lock(mutex_);
    opt.id = "s" + std::to_string(++counter_) + "-" + random_suffix();
    opt.transcript_path = options_.data_dir / (opt.id + ".jsonl");
    runner = std::make_shared<SessionRunner>(std::move(opt), deps_);
    sessions_[runner->id()] = runner;
  }
  return describe(*runner);
}

nlohmann::json CompanionService::describe(const SessionRunner& r) const {
  const auto state = r.state();
  return {{"session_id", r.id()},
          {"created_at", iso8601(r.created_at())},
          {"status", r.status() == SessionStatus::Running ? "running" : "ended"},
          {"config", to_json(r.options().config)},
          {"speedup", r.options().speedup},
          {"clock", r.options().clock == ClockMode::Manual ? "manual" : "realtime"},
          {"mode", std::string(to_string(state.mode))},
          {"logical_time", state.clock},
          {"utterance_seq", state.utterance_seq},
          {"next_utterance_at", state.next_utterance_at},
          {"transcript_path", r.options().transcript_path.string()}};
}

nlohmann::json CompanionService::list_sessions() const {
  std::vector<std::shared_ptr<SessionRunner>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, r] : sessions_) all.push_back(r);
  }
  auto out = nlohmann::json::array();
  for (const auto& r : all) out.push_back(describe(*r));
  return out;
}

std::shared_ptr<SessionRunner> CompanionService::runner(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session " + id);
  return it->second;
}

std::shared_ptr<SessionRunner> CompanionService::running(const std::string& id) const {
  auto r = runner(id);
  if (r->status() == SessionStatus::Ended) throw ServiceError(409, "session " + id + " has ended");
  return r;
}

nlohmann::json CompanionService::describe(const std::string& id) const { return describe(*runner(id)); }

void CompanionService::post_message(const std::string& id, const std::string& text) {
  running(id)->post_user_message(text);
}

void CompanionService::post_feed(const std::string& id, const nlohmann::json& body) {
  auto r = running(id);
  nlohmann::json record = body;
  if (record.is_object() && !record.contains("t")) record["t"] = 0.0;  // stamped on arrival
  FeedEvent ev;
  try {
    ev = parse_feed_event(record.dump());
  } catch (const DataError& e) {
    throw ServiceError(400, e.what());
  }
  r->post_feed_event(std::move(ev));
}

void CompanionService::cancel(const std::string& id) { running(id)->cancel(); }
void CompanionService::end(const std::string& id) { running(id)->end(); }
void CompanionService::advance(const std::string& id, double seconds) { running(id)->advance(seconds); }

std::string CompanionService::transcript_jsonl(const std::string& id) const {
  std::string out;
  for (const auto& e : runner(id)->transcript()) out += to_jsonl(e) + "\n";
  return out;
}

nlohmann::json CompanionService::stats(const std::string& id) const {
  return stats_to_json(compute_turn_stats(runner(id)->transcript()));
}

// ---------------------------------------------------------------- routes

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), kJson);
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ServiceError(400, std::string("invalid JSON body: ") + e.what());
  }
}

bool wants_wait(const httplib::Request& req) {
  return req.has_param("wait") && req.get_param_value("wait") != "0";
}

std::size_t cursor_of(const httplib::Request& req) {
  std::string raw;
  if (req.has_param("cursor")) raw = req.get_param_value("cursor");
  else if (req.has_header("Last-Event-ID")) {
    // Last-Event-ID names the last delivered entry; resume after it.
    raw = req.get_header_value("Last-Event-ID");
    try {
      return static_cast<std::size_t>(std::stoull(raw)) + 1;
    } catch (const std::exception&) {
      throw ServiceError(400, "bad Last-Event-ID");
    }
  }
  if (raw.empty()) return 0;
  try {
    return static_cast<std::size_t>(std::stoull(raw));
  } catch (const std::exception&) {
    throw ServiceError(400, "bad cursor");
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const ServiceError& e) {
      send_json(res, {{"error", e.what()}}, e.status());
    } catch (const ContractError& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const DataError& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, CompanionService& service) {
  const std::string sid = "/api/sessions/([A-Za-z0-9_-]+)";

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok\n", "text/plain");
  });

  server.Post("/api/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, service.create_session(parse_body(req)), 201);
  }));
  server.Get("/api/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
    send_json(res, service.list_sessions());
  }));
  server.Get(sid, guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, service.describe(req.matches[1]));
  }));

  server.Post(sid + "/messages", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("text") || !body["text"].is_string()) throw ServiceError(400, "text must be a string");
    const std::string id = req.matches[1];
    service.post_message(id, body["text"].get<std::string>());
    if (wants_wait(req)) service.runner(id)->sync();
    send_json(res, {{"accepted", true}}, 202);
  }));
  server.Post(sid + "/feed", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service.post_feed(id, parse_body(req));
    if (wants_wait(req)) service.runner(id)->sync();
    send_json(res, {{"accepted", true}}, 202);
  }));
  server.Post(sid + "/cancel", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service.cancel(id);
    if (wants_wait(req)) service.runner(id)->sync();
    send_json(res, {{"accepted", true}}, 202);
  }));
  server.Post(sid + "/advance", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("seconds") || !body["seconds"].is_number()) {
      throw ServiceError(400, "seconds must be a number");
    }
    const std::string id = req.matches[1];
    service.advance(id, body["seconds"].get<double>());
    service.runner(id)->sync();
    send_json(res, service.describe(id), 200);
  }));
  server.Post(sid + "/end", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service.end(id);
    auto j = service.describe(id);
    j["transcript_url"] = "/api/sessions/" + id + "/transcript";
    send_json(res, j);
  }));

  server.Get(sid + "/transcript", guarded([&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(service.transcript_jsonl(req.matches[1]), "application/x-ndjson");
  }));
  server.Get(sid + "/stats", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, service.stats(req.matches[1]));
  }));

  // Long-poll variant of the stream for clients without SSE support.
  server.Get(sid + "/events.json", guarded([&](const httplib::Request& req, httplib::Response& res) {
    auto runner = service.runner(req.matches[1]);
    const auto cursor = cursor_of(req);
    long wait_ms = 0;
    if (req.has_param("wait_ms")) wait_ms = std::stol(req.get_param_value("wait_ms"));
    auto [entries, ended] = runner->read_from(cursor, std::chrono::milliseconds(std::clamp(wait_ms, 0L, 30000L)));
    auto list = nlohmann::json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto ev = to_stream_event(entries[i], cursor + i);
      list.push_back({{"id", ev.cursor}, {"event", ev.name}, {"data", ev.data}});
    }
    send_json(res, {{"events", list}, {"next_cursor", cursor + entries.size()}, {"ended", ended}});
  }));

  server.Get(sid + "/events", guarded([&](const httplib::Request& req, httplib::Response& res) {
    auto runner = service.runner(req.matches[1]);
    auto cursor = std::make_shared<std::size_t>(cursor_of(req));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [runner, cursor](std::size_t, httplib::DataSink& sink) {
          auto [entries, ended] = runner->read_from(*cursor, std::chrono::milliseconds(1000));
          std::string chunk;
          for (const auto& e : entries) chunk += format_sse(to_stream_event(e, (*cursor)++));
          if (chunk.empty() && !ended) chunk = ": keepalive\n\n";
          if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
          if (ended) {
            const std::string done = "event: end\ndata: {}\n\n";
            sink.write(done.data(), done.size());
            sink.done();
          }
          return sink.is_writable();
        });
  }));

  if (service.options().web_root) server.set_mount_point("/", service.options().web_root->string());
}

}  // namespace tvc
