#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tvcompanion/stats.hpp"
#include "tvcompanion/transcript.hpp"

using namespace tvc;
using namespace tvc::testing;

namespace {

std::vector<TranscriptEntry> fixture() {
  std::ifstream in(source_path("tests/fixtures/turns_3_and_5.jsonl"));
  std::vector<TranscriptParseError> errors;
  auto entries = read_transcript(in, &errors);
  REQUIRE(errors.empty());
  return entries;
}

}  // namespace

TEST_SUITE("transcript_stats") {
  TEST_CASE("jsonl keys are sorted and round trip") {
    TranscriptEntry e;
    e.t = 1.5;
    e.speaker = Speaker::Robot;
    e.kind = EntryKind::Response;
    e.text = "hi \"there\"";
    e.engine = EngineId::DailyLife;
    e.similarity = 0.42;
    e.turn_index = 2;
    e.conversation_id = 3;
    const auto line = to_jsonl(e);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find("\"conversation_id\"") < line.find("\"engine\""));
    CHECK(line.find("\"engine\"") < line.find("\"kind\""));
    CHECK(line.find("\"text\"") < line.find("\"turn_index\""));
    std::istringstream in(line + "\n");
    auto back = read_transcript(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == e);
  }

  TEST_CASE("malformed lines are reported and skipped") {
    std::istringstream in("{\"t\":1,\"speaker\":\"user\",\"kind\":\"user\",\"text\":\"a\"}\nnot json\n"
                          "{\"t\":2,\"speaker\":\"alien\",\"kind\":\"user\",\"text\":\"b\"}\n\n");
    std::vector<TranscriptParseError> errors;
    auto entries = read_transcript(in, &errors);
    CHECK(entries.size() == 1);
    REQUIRE(errors.size() == 2);
    CHECK(errors[0].line == 2);
    CHECK(errors[1].line == 3);
  }

  TEST_CASE("writer flushes every line") {
    auto dir = scratch_dir("writer");
    auto path = (dir / "t.jsonl").string();
    TranscriptWriter w(path);
    TranscriptEntry e;
    e.text = "x";
    w.append(e);
    std::ifstream in(path);
    std::string line;
    CHECK(std::getline(in, line));
    CHECK(line == to_jsonl(e));
  }

  TEST_CASE("fixture with 3- and 5-turn conversations") {
    // Oracle: (3 + 5) / 2 = 4, max 5; robot turns (2 + 3) / 2 = 2.5, max 3.
    auto stats = compute_turn_stats(fixture());
    REQUIRE(stats.conversation_count == 2);
    CHECK(stats.conversations[0].turns == 3);
    CHECK(stats.conversations[1].turns == 5);
    CHECK(*stats.mean == 4.0);
    CHECK(stats.max == 5);
    CHECK(*stats.robot_mean == 2.5);
    CHECK(stats.robot_max == 3);
  }

  TEST_CASE("re-asks count as turns but not as robot turns") {
    auto make = [](Speaker s, EntryKind k, bool reask) {
      TranscriptEntry e;
      e.speaker = s;
      e.kind = k;
      e.conversation_id = 1;
      if (reask) e.event = std::string(events::kReask);
      return e;
    };
    std::vector<TranscriptEntry> es{make(Speaker::Robot, EntryKind::Question, false),
                                    make(Speaker::Robot, EntryKind::Question, true),
                                    make(Speaker::User, EntryKind::User, false)};
    auto stats = compute_turn_stats(es);
    CHECK(stats.conversations[0].turns == 3);
    CHECK(stats.conversations[0].robot_turns == 1);
  }

  TEST_CASE("empty transcript has no mean") {
    auto stats = compute_turn_stats({});
    CHECK(stats.conversation_count == 0);
    CHECK_FALSE(stats.mean.has_value());
    std::ostringstream out;
    print_stats_table({{"empty", stats}}, out);
    CHECK(out.str().find("Average") != std::string::npos);
    CHECK(out.str().find(" -") != std::string::npos);
  }

  TEST_CASE("table shape") {
    std::ostringstream out;
    auto s = compute_turn_stats(fixture());
    print_stats_table({{"Group 1", s}, {"Group 2", s}}, out);
    const auto text = out.str();
    CHECK(text.rfind("Turns per conversation", 0) == 0);
    CHECK(text.find("Group 1     Group 2") != std::string::npos);
    CHECK(text.find("Average                 4.00        4.00") != std::string::npos);
    CHECK(text.find("Maximum                    5           5") != std::string::npos);
  }
}
