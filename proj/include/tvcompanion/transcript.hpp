#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tvcompanion/engine_id.hpp"

namespace tvc {

enum class Mode { TVWatching, Conversing };
enum class Speaker { Robot, User, System };
enum class EntryKind { Disclosure, Question, Response, User, Event };

std::string_view to_string(Mode mode);
std::string_view to_string(Speaker speaker);
std::string_view to_string(EntryKind kind);

/// Event names carried by system entries and mirrored on the service stream.
namespace events {
inline constexpr std::string_view kCaptionShown = "caption_shown";
inline constexpr std::string_view kKeywordExtracted = "keyword_extracted";
inline constexpr std::string_view kModeChanged = "mode_changed";
inline constexpr std::string_view kConversationEnded = "conversation_ended";
inline constexpr std::string_view kCancelled = "cancelled";
inline constexpr std::string_view kReask = "reask";  // robot entry repeating the pending question
}  // namespace events

/// Causes recorded on mode_changed / conversation_ended entries.
namespace causes {
inline constexpr std::string_view kQuestion = "question";
inline constexpr std::string_view kEndIntent = "end_intent";
inline constexpr std::string_view kNoAnswer = "no_answer";
inline constexpr std::string_view kCancel = "cancel";
}  // namespace causes

struct TranscriptEntry {
  double t = 0.0;
  Speaker speaker = Speaker::System;
  std::string text;
  EntryKind kind = EntryKind::Event;
  std::optional<EngineId> engine;
  std::optional<long long> conversation_id;

  std::optional<std::string> event;
  std::optional<std::string> cause;
  std::optional<std::string> keyword;
  std::optional<std::string> source;
  std::optional<double> similarity;
  std::optional<Mode> from;
  std::optional<Mode> to;
  std::optional<int> turns;        // both speakers
  std::optional<int> robot_turns;  // question + responses
  std::optional<long long> seq;    // robot utterance sequence number
  std::optional<int> turn_index;   // responses only
  std::optional<int> template_id;

  bool is_utterance() const { return speaker == Speaker::Robot || speaker == Speaker::User; }
  bool operator==(const TranscriptEntry&) const = default;
};

nlohmann::json to_json(const TranscriptEntry& entry);
TranscriptEntry entry_from_json(const nlohmann::json& j);
/// Compact single-line JSON; keys are emitted in sorted order.
std::string to_jsonl(const TranscriptEntry& entry);

/// Appends one line per entry and flushes after each write.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::string& path);
  void append(const TranscriptEntry& entry);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

struct TranscriptParseError {
  std::size_t line;
  std::string message;
};

/// Parses a JSON-lines transcript. Malformed lines are reported and skipped.
std::vector<TranscriptEntry> read_transcript(std::istream& in,
                                             std::vector<TranscriptParseError>* errors = nullptr);

}  // namespace tvc
