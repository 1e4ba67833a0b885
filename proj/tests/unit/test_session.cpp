#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tvcompanion/errors.hpp"
#include "tvcompanion/session.hpp"

using namespace tvc;
using namespace tvc::testing;

namespace {

const Resources& demo() {
  static const Resources res = demo_resources();
  return res;
}

SessionConfig questions_only() {
  SessionConfig c;
  c.disclosure_ratio = 1e-9;
  return c;
}

FeedEvent detect(std::string label, double t) { return {FeedKind::Detection, std::move(label), 0.9, t}; }

// Runs until the first question and returns its time.
double until_question(Session& s) {
  s.ingest(detect("elephant", 0.0));
  auto out = s.tick(s.next_due());
  REQUIRE(s.state().mode == Mode::Conversing);
  return s.state().clock;
}

int count_event(const std::vector<TranscriptEntry>& es, std::string_view ev) {
  int n = 0;
  for (const auto& e : es) n += e.event && *e.event == ev;
  return n;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("schedule_next clamps to [1, 10 x mean]") {
    Rng rng(1);
    for (int i = 0; i < 20000; ++i) {
      const double d = schedule_next(100.0, 80.0, rng) - 100.0;
      CHECK(d >= 1.0);
      CHECK(d <= 800.0);
    }
    Rng tiny(1);
    CHECK(schedule_next(0.0, 0.01, tiny) >= 1.0);
  }

  TEST_CASE("end-intent lexicon is a case-insensitive substring match") {
    SessionConfig c;
    CHECK(matches_end_intent("OK BYE", c.end_lexicon));
    CHECK(matches_end_intent("Let's watch the show", c.end_lexicon));
    CHECK(matches_end_intent("please stop", c.end_lexicon));
    CHECK(matches_end_intent("That's enough!", c.end_lexicon));
    CHECK_FALSE(matches_end_intent("I like elephants", c.end_lexicon));
    CHECK(matches_end_intent("goodbye", c.end_lexicon));  // substring semantics
  }

  TEST_CASE("config validation and overrides") {
    CHECK_NOTHROW(SessionConfig{}.validate());
    SessionConfig c;
    c.mean_interval_s = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    CHECK_THROWS_AS(apply_overrides({}, {{"bogus", 1}}), ContractError);
    CHECK_THROWS_AS(apply_overrides({}, {{"mean_interval_s", "fast"}}), ContractError);
    auto o = apply_overrides({}, {{"mean_interval_s", 30}, {"end_lexicon", {"ciao"}}});
    CHECK(o.mean_interval_s == 30);
    CHECK(o.end_lexicon == std::vector<std::string>{"ciao"});
    CHECK(o.disclosure_ratio == 0.75);
    auto round = apply_overrides({}, to_json(o));
    CHECK(round.mean_interval_s == 30);
  }

  TEST_CASE("defaults") {
    SessionConfig c;
    CHECK(c.mean_interval_s == 80.0);
    CHECK(c.disclosure_ratio == 0.75);
    CHECK(c.silence_timeout_s == 15.0);
    CHECK(c.max_no_answer == 2);
    CHECK(c.cooldown_utterances == 10);
  }

  TEST_CASE("question is followed immediately by mode_changed") {
    Session s(questions_only(), demo().deps);
    until_question(s);
    const auto& tr = s.transcript();
    std::size_t qi = 0;
    while (tr[qi].kind != EntryKind::Question) ++qi;
    REQUIRE(qi + 1 < tr.size());
    CHECK(tr[qi + 1].event == std::string(events::kModeChanged));
    CHECK(tr[qi + 1].cause == std::string(causes::kQuestion));
    CHECK(tr[qi].text == "Do you like elephant?");
    CHECK(s.state().conversation_turn == 1);
  }

  TEST_CASE("silence: two re-asks, ends on the third") {
    Session s(questions_only(), demo().deps);
    const double tq = until_question(s);
    auto out = s.tick(tq + 14.9);
    CHECK(out.empty());
    out = s.tick(tq + 15.0);
    CHECK(count_event(out, events::kReask) == 1);
    out = s.tick(tq + 30.0);
    CHECK(count_event(out, events::kReask) == 1);
    CHECK(s.state().mode == Mode::Conversing);
    out = s.tick(tq + 45.0);
    CHECK(count_event(out, events::kConversationEnded) == 1);
    CHECK(s.state().mode == Mode::TVWatching);
    for (const auto& e : out) {
      if (e.event == std::string(events::kConversationEnded)) CHECK(e.cause == std::string(causes::kNoAnswer));
    }
  }

  TEST_CASE("an answer resets the silence counter") {
    Session s(questions_only(), demo().deps);
    const double tq = until_question(s);
    s.tick(tq + 15.0);  // one re-ask
    s.on_user_utterance("yes I love elephants", tq + 16.0);
    CHECK(s.state().no_answer_count == 0);
    s.tick(tq + 16.0 + 30.0);  // two more silences: still open
    CHECK(s.state().mode == Mode::Conversing);
    s.tick(tq + 16.0 + 45.0);
    CHECK(s.state().mode == Mode::TVWatching);
  }

  TEST_CASE("blank input counts as silence") {
    Session s(questions_only(), demo().deps);
    const double tq = until_question(s);
    auto out = s.on_user_utterance("   ", tq + 1.0);
    CHECK(count_event(out, events::kReask) == 1);
    CHECK(s.state().no_answer_count == 1);
  }

  TEST_CASE("end lexicon ends immediately") {
    Session s(questions_only(), demo().deps);
    const double tq = until_question(s);
    auto out = s.on_user_utterance("Yes, I love elephants.", tq + 2);
    REQUIRE(out.size() == 2);
    CHECK(out[1].kind == EntryKind::Response);
    CHECK(out[1].engine.has_value());
    CHECK(out[1].turn_index == 1);
    out = s.on_user_utterance("ok, bye", tq + 4);
    CHECK(count_event(out, events::kConversationEnded) == 1);
    CHECK(s.state().mode == Mode::TVWatching);
    const auto& ended = out[1];
    CHECK(ended.cause == std::string(causes::kEndIntent));
    CHECK(ended.turns == 4);
    CHECK(ended.robot_turns == 2);
  }

  TEST_CASE("cancel ends a conversation and is idempotent") {
    Session s(questions_only(), demo().deps);
    const double tq = until_question(s);
    auto out = s.cancel(tq + 1);
    REQUIRE(out.size() == 3);
    CHECK(out[0].event == std::string(events::kCancelled));
    CHECK(out[1].cause == std::string(causes::kCancel));
    CHECK(out[2].event == std::string(events::kModeChanged));
    CHECK(out[2].cause == std::string(causes::kCancel));
    CHECK(s.cancel(tq + 2).empty());
  }

  TEST_CASE("cancel while watching suppresses the pending utterance") {
    Session s(SessionConfig{}, demo().deps);
    s.ingest(detect("elephant", 0.0));
    const double due = s.next_due();
    auto out = s.cancel(due / 2);
    REQUIRE(out.size() == 1);
    CHECK(out[0].event == std::string(events::kCancelled));
    CHECK(s.next_due() > due / 2);
    CHECK(s.state().utterance_seq == 0);
  }

  TEST_CASE("time cannot go backwards") {
    Session s(SessionConfig{}, demo().deps);
    s.tick(10.0);
    CHECK_THROWS_AS(s.tick(9.0), ContractError);
    CHECK_THROWS_AS(s.on_user_utterance("hi", 5.0), ContractError);
  }

  TEST_CASE("user text while watching is logged without a reply") {
    Session s(SessionConfig{}, demo().deps);
    auto out = s.on_user_utterance("hello robot", 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].speaker == Speaker::User);
    CHECK_FALSE(out[0].conversation_id.has_value());
  }

  TEST_CASE("same seed, same transcript") {
    auto run = [] {
      Session s(SessionConfig{}, demo().deps);
      s.ingest({FeedKind::Caption, "Elephants and a giraffe at the zoo", 1.0, 0.0});
      s.tick(3600.0);
      return s.transcript();
    };
    CHECK(run() == run());
  }

  TEST_CASE("sink sees every entry in order") {
    std::vector<TranscriptEntry> seen;
    Session s(questions_only(), demo().deps, [&](const TranscriptEntry& e) { seen.push_back(e); });
    until_question(s);
    s.tick(200.0);
    CHECK(seen == s.transcript());
  }
}
