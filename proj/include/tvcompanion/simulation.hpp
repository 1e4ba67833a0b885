#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvcompanion/resources.hpp"
#include "tvcompanion/stats.hpp"

namespace tvc {

enum class Trigger { AfterRobotQuestion, AfterRobotResponse, AtTime };

/// One scripted user action. Steps are consumed in order; the head step
/// waits for its trigger, then acts `delay_s` later. A re-asked question
/// counts as a robot question for triggering.
struct ScriptStep {
  Trigger trigger = Trigger::AfterRobotQuestion;
  std::optional<std::string> text;  // empty optional with !cancel means silence
  bool cancel = false;
  double delay_s = 2.0;
  double at = 0.0;  // AtTime only
};

struct Scenario {
  std::string name;
  std::vector<FeedEvent> feed;
  std::vector<ScriptStep> user_script;
  bool repeat_script = false;
  nlohmann::json config_overrides = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  ResourcePaths resources;
  double duration_s = 3600.0;
  std::optional<long long> max_robot_utterances;  // stop once utterance_seq reaches this
};

/// Parses a scenario document. `feed` may be a path (relative to base_dir)
/// or an inline array of feed records.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario_file(const std::string& path);

struct SimulationResult {
  std::vector<TranscriptEntry> transcript;
  SessionConfig config;
  SessionState final_state;
  TurnStats stats;
  // conversation id -> session-internal conversation_turn when it ended
  // (or at the end of the run for a conversation still open).
  std::map<long long, int> internal_robot_turns;
  std::map<std::string, int> keyword_usage;
  std::map<std::string, int> engine_usage;
};

/// Runs the scenario as a discrete-event simulation in logical time. When
/// `transcript_path` is non-empty the transcript is written there as it grows.
SimulationResult simulate(const Scenario& scenario, const SessionDeps& deps,
                          const std::string& transcript_path = {},
                          std::optional<std::uint64_t> seed_override = std::nullopt);

void print_summary(const SimulationResult& result, std::ostream& out);

}  // namespace tvc
