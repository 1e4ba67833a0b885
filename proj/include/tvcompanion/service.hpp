#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tvcompanion/resources.hpp"
#include "tvcompanion/stats.hpp"

namespace httplib {
class Server;
}

namespace tvc {

/// Service-level failure carrying the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SessionStatus { Running, Ended };
enum class ClockMode { Realtime, Manual };

struct StreamEvent {
  std::size_t cursor;  // transcript index
  std::string name;
  nlohmann::json data;
};

/// Maps a transcript entry onto its stream event (robot_utterance,
/// user_utterance, or the system entry's event name).
StreamEvent to_stream_event(const TranscriptEntry& entry, std::size_t cursor);
/// "id: <cursor>\nevent: <name>\ndata: <json>\n\n"
std::string format_sse(const StreamEvent& event);

/// One live session: a Session driven by its own loop thread. All session
/// mutation happens on that thread; other threads enqueue commands and read
/// transcript snapshots.
class SessionRunner {
 public:
  struct Options {
    std::string id;
    SessionConfig config;
    std::vector<FeedEvent> feed;
    double speedup = 1.0;
    ClockMode clock = ClockMode::Realtime;
    std::filesystem::path transcript_path;
  };

  SessionRunner(Options options, SessionDeps deps);
  ~SessionRunner();
  SessionRunner(const SessionRunner&) = delete;
  SessionRunner& operator=(const SessionRunner&) = delete;

  void post_user_message(std::string text);
  void post_feed_event(FeedEvent event);
  void cancel();
  void end();
  /// Manual clock only: move logical time forward.
  void advance(double seconds);
  /// Blocks until every command enqueued so far has been applied.
  void sync();

  /// Entries from `cursor` on, waiting up to `wait` for at least one. The
  /// flag is true once the session has ended and the returned batch reaches
  /// the end of the transcript.
  std::pair<std::vector<TranscriptEntry>, bool> read_from(std::size_t cursor,
                                                          std::chrono::milliseconds wait);
  std::vector<TranscriptEntry> transcript() const;

  const std::string& id() const { return options_.id; }
  const Options& options() const { return options_; }
  SessionStatus status() const;
  SessionState state() const;
  std::chrono::system_clock::time_point created_at() const { return created_at_; }

 private:
  struct UserMessage { std::string text; };
  struct Cancel {};
  struct End {};
  struct Advance { double seconds; };
  struct Sync { std::uint64_t ticket; };
  using Command = std::variant<UserMessage, FeedEvent, Cancel, End, Advance, Sync>;

  void enqueue(Command command);
  void loop();
  double logical_now() const;
  void on_entry(const TranscriptEntry& entry);

  Options options_;
  std::chrono::system_clock::time_point created_at_;
  std::chrono::steady_clock::time_point started_;
  double manual_clock_ = 0.0;

  mutable std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<Command> queue_;
  std::uint64_t sync_issued_ = 0;
  std::uint64_t sync_done_ = 0;
  std::condition_variable sync_cv_;
  bool stop_ = false;

  mutable std::mutex transcript_mutex_;
  std::condition_variable transcript_cv_;
  std::vector<TranscriptEntry> transcript_;
  SessionState state_;
  SessionStatus status_ = SessionStatus::Running;

  std::unique_ptr<TranscriptWriter> writer_;
  std::unique_ptr<Session> session_;
  std::size_t next_feed_ = 0;
  std::thread thread_;
};

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  std::optional<std::filesystem::path> web_root;
};

/// Session registry behind the HTTP routes. Thread-safe.
class CompanionService {
 public:
  CompanionService(SessionDeps deps, ServiceOptions options);
  ~CompanionService();

  /// Body: {config?: {...}, feed: {inline: [...]} | {file: path}, speedup?, clock?: "realtime"|"manual"}
  nlohmann::json create_session(const nlohmann::json& body);
  nlohmann::json list_sessions() const;
  nlohmann::json describe(const std::string& id) const;
  void post_message(const std::string& id, const std::string& text);
  void post_feed(const std::string& id, const nlohmann::json& body);
  void cancel(const std::string& id);
  void end(const std::string& id);
  void advance(const std::string& id, double seconds);
  std::string transcript_jsonl(const std::string& id) const;
  nlohmann::json stats(const std::string& id) const;
  std::shared_ptr<SessionRunner> runner(const std::string& id) const;

  const ServiceOptions& options() const { return options_; }

 private:
  std::shared_ptr<SessionRunner> running(const std::string& id) const;
  nlohmann::json describe(const SessionRunner& runner) const;

  SessionDeps deps_;
  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionRunner>> sessions_;
  std::uint64_t counter_ = 0;
};

nlohmann::json stats_to_json(const TurnStats& stats);

/// Installs the REST + event-stream routes on `server`.
void register_routes(httplib::Server& server, CompanionService& service);

}  // namespace tvc
