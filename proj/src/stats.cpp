#include "tvcompanion/stats.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tvc {

TurnStats compute_turn_stats(const std::vector<TranscriptEntry>& entries) {
  std::map<long long, ConversationTurns> by_id;
  for (const auto& e : entries) {
    if (!e.conversation_id) continue;
    auto& conv = by_id[*e.conversation_id];
    conv.conversation_id = *e.conversation_id;
    if (!e.is_utterance()) continue;
    ++conv.turns;
    if (e.speaker == Speaker::Robot && e.event != events::kReask) ++conv.robot_turns;
  }

  TurnStats stats;
  long long sum = 0;
  long long robot_sum = 0;
  for (auto& [id, conv] : by_id) {
    stats.conversations.push_back(conv);
    sum += conv.turns;
    robot_sum += conv.robot_turns;
    stats.max = std::max(stats.max, conv.turns);
    stats.robot_max = std::max(stats.robot_max, conv.robot_turns);
  }
  stats.conversation_count = stats.conversations.size();
  if (stats.conversation_count > 0) {
    auto n = static_cast<double>(stats.conversation_count);
    stats.mean = static_cast<double>(sum) / n;
    stats.robot_mean = static_cast<double>(robot_sum) / n;
  }
  return stats;
}

namespace {

std::string fmt_mean(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << *v;
  return s.str();
}

std::string fmt_max(const TurnStats& s, int value) {
  return s.conversation_count == 0 ? "-" : std::to_string(value);
}

void row(std::ostream& out, const std::string& label, const std::vector<std::string>& cells) {
  out << std::left << std::setw(16) << label;
  for (const auto& c : cells) out << std::right << std::setw(12) << c;
  out << '\n';
}

}  // namespace

void print_stats_table(const std::vector<StatsGroup>& groups, std::ostream& out) {
  std::vector<std::string> labels, counts, means, maxes, robot_means, robot_maxes;
  for (const auto& g : groups) {
    labels.push_back(g.label);
    counts.push_back(std::to_string(g.stats.conversation_count));
    means.push_back(fmt_mean(g.stats.mean));
    maxes.push_back(fmt_max(g.stats, g.stats.max));
    robot_means.push_back(fmt_mean(g.stats.robot_mean));
    robot_maxes.push_back(fmt_max(g.stats, g.stats.robot_max));
  }
  out << "Turns per conversation (robot + user utterances)\n";
  row(out, "", labels);
  row(out, "Conversations", counts);
  row(out, "Average", means);
  row(out, "Maximum", maxes);
  out << "\nRobot turns per conversation\n";
  row(out, "", labels);
  row(out, "Average", robot_means);
  row(out, "Maximum", robot_maxes);
}

}  // namespace tvc
