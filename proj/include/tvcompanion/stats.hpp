#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvcompanion/transcript.hpp"

namespace tvc {

struct ConversationTurns {
  long long conversation_id = 0;
  int turns = 0;        // robot + user utterances
  int robot_turns = 0;  // question + responses, re-asks excluded
};

struct TurnStats {
  std::vector<ConversationTurns> conversations;  // ordered by conversation id
  std::size_t conversation_count = 0;
  std::optional<double> mean;        // undefined when there are no conversations
  int max = 0;
  std::optional<double> robot_mean;
  int robot_max = 0;
};

/// A conversation is the set of entries sharing a conversation_id; its turn
/// count is the number of robot and user utterances in it.
TurnStats compute_turn_stats(const std::vector<TranscriptEntry>& entries);

struct StatsGroup {
  std::string label;
  TurnStats stats;
};

/// Average / Maximum rows with one column per group, followed by the
/// robot-only variant.
void print_stats_table(const std::vector<StatsGroup>& groups, std::ostream& out);

}  // namespace tvc
