#include "tvcompanion/simulation.hpp"

#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

namespace tvc {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

ScriptStep parse_step(const nlohmann::json& j, std::size_t index) {
  auto fail = [&](const std::string& why) {
    return DataError("user_script[" + std::to_string(index) + "]: " + why);
  };
  if (!j.is_object()) throw fail("must be an object");
  ScriptStep step;
  const auto trigger = j.value("trigger", std::string("after_robot_question"));
  if (trigger == "after_robot_question") step.trigger = Trigger::AfterRobotQuestion;
  else if (trigger == "after_robot_response") step.trigger = Trigger::AfterRobotResponse;
  else if (trigger == "at_time") step.trigger = Trigger::AtTime;
  else throw fail("unknown trigger '" + trigger + "'");

  step.delay_s = j.value("delay_s", 2.0);
  if (!(step.delay_s >= 0.0)) throw fail("delay_s must be >= 0");
  if (step.trigger == Trigger::AtTime) {
    if (!j.contains("t") || !j["t"].is_number()) throw fail("at_time needs numeric 't'");
    step.at = j["t"].get<double>();
    if (!(step.at >= 0.0)) throw fail("'t' must be >= 0");
  }
  step.cancel = j.value("cancel", false);
  const bool silence = j.value("silence", false);
  if (j.contains("text")) {
    if (!j["text"].is_string()) throw fail("text must be a string");
    step.text = j["text"].get<std::string>();
  }
  int actions = (step.text ? 1 : 0) + (silence ? 1 : 0) + (step.cancel ? 1 : 0);
  if (actions != 1) throw fail("exactly one of text, silence, cancel is required");
  return step;
}

Trigger trigger_of(const TranscriptEntry& e) {
  return e.kind == EntryKind::Question ? Trigger::AfterRobotQuestion : Trigger::AfterRobotResponse;
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("scenario must be a JSON object");
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    s.duration_s = j.value("duration_s", 3600.0);
    if (!(s.duration_s > 0.0)) throw DataError("duration_s must be > 0");
    if (j.contains("max_robot_utterances")) s.max_robot_utterances = j["max_robot_utterances"].get<long long>();
    s.repeat_script = j.value("repeat_script", false);
    if (j.contains("config")) s.config_overrides = j["config"];
    if (!j.contains("resources")) throw DataError("scenario needs a resources block");
    const auto& res = j["resources"];
    if (res.is_string()) {
      std::filesystem::path p(res.get<std::string>());
      s.resources = load_resource_paths_file((p.is_absolute() ? p : base_dir / p).string());
    } else {
      s.resources = resource_paths_from_json(res, base_dir);
    }

    if (!j.contains("feed")) throw DataError("scenario needs a feed");
    const auto& feed = j["feed"];
    if (feed.is_string()) {
      std::filesystem::path p(feed.get<std::string>());
      s.feed = load_feed_file((p.is_absolute() ? p : base_dir / p).string());
    } else if (feed.is_array()) {
      for (const auto& record : feed) {
        s.feed.push_back(parse_feed_event(record.dump()));
        if (s.feed.size() > 1 && s.feed.back().t < s.feed[s.feed.size() - 2].t) {
          throw DataError("inline feed timestamps go backwards");
        }
      }
    } else {
      throw DataError("feed must be a path or an array");
    }

    if (j.contains("user_script")) {
      const auto& script = j["user_script"];
      if (!script.is_array()) throw DataError("user_script must be an array");
      for (std::size_t i = 0; i < script.size(); ++i) s.user_script.push_back(parse_step(script[i], i));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("scenario is not valid JSON: " + std::string(e.what()));
  }
  return parse_scenario(j, std::filesystem::absolute(path).parent_path());
}

SimulationResult simulate(const Scenario& scenario, const SessionDeps& deps,
                          const std::string& transcript_path,
                          std::optional<std::uint64_t> seed_override) {
  SessionConfig config = apply_overrides(SessionConfig{}, scenario.config_overrides);
  if (scenario.seed) config.rng_seed = *scenario.seed;
  if (seed_override) config.rng_seed = *seed_override;

  std::optional<TranscriptWriter> writer;
  if (!transcript_path.empty()) writer.emplace(transcript_path);
  Session session(config, deps, [&](const TranscriptEntry& e) {
    if (writer) writer->append(e);
  });

  SimulationResult result;
  std::deque<ScriptStep> script(scenario.user_script.begin(), scenario.user_script.end());
  auto pop_step = [&] {
    ScriptStep step = script.front();
    script.pop_front();
    if (script.empty() && scenario.repeat_script) {
      script.assign(scenario.user_script.begin(), scenario.user_script.end());
    }
    return step;
  };

  std::optional<std::pair<double, ScriptStep>> pending;
  auto arm_timed = [&] {
    if (!pending && !script.empty() && script.front().trigger == Trigger::AtTime) {
      ScriptStep step = pop_step();
      pending.emplace(std::max(step.at, session.state().clock), step);
    }
  };
  auto observe = [&](const std::vector<TranscriptEntry>& entries) {
    for (const auto& e : entries) {
      if (e.event == events::kConversationEnded && e.conversation_id && e.robot_turns) {
        result.internal_robot_turns[*e.conversation_id] = *e.robot_turns;
      }
      if (e.speaker != Speaker::Robot) continue;
      if (pending || script.empty() || script.front().trigger != trigger_of(e)) continue;
      ScriptStep step = pop_step();
      if (step.text || step.cancel) pending.emplace(e.t + step.delay_s, step);
    }
    arm_timed();
  };
  auto reached_cap = [&] {
    return scenario.max_robot_utterances &&
           session.state().utterance_seq >= *scenario.max_robot_utterances;
  };

  std::size_t next_feed = 0;
  arm_timed();
  while (!reached_cap()) {
    const double t_feed = next_feed < scenario.feed.size() ? scenario.feed[next_feed].t : kNever;
    const double t_user = pending ? pending->first : kNever;
    const double t_external = std::min(t_feed, t_user);
    const double t_due = session.next_due();
    if (t_due <= t_external && t_due <= scenario.duration_s) {
      observe(session.tick(t_due));
      continue;
    }
    if (t_external > scenario.duration_s) break;
    if (t_feed <= t_user) {
      observe(session.ingest(scenario.feed[next_feed++]));
      continue;
    }
    auto [t, step] = *pending;
    pending.reset();
    observe(step.cancel ? session.cancel(t) : session.on_user_utterance(*step.text, t));
  }
  if (!reached_cap() && session.state().clock < scenario.duration_s) {
    observe(session.tick(scenario.duration_s));
  }

  result.transcript = session.transcript();
  result.config = session.config();
  result.final_state = session.state();
  if (result.final_state.mode == Mode::Conversing) {
    for (auto it = result.transcript.rbegin(); it != result.transcript.rend(); ++it) {
      if (it->conversation_id) {
        result.internal_robot_turns[*it->conversation_id] = result.final_state.conversation_turn;
        break;
      }
    }
  }
  result.stats = compute_turn_stats(result.transcript);
  for (const auto& e : result.transcript) {
    if (e.speaker != Speaker::Robot) continue;
    if (e.kind == EntryKind::Response && e.engine) ++result.engine_usage[std::string(to_string(*e.engine))];
    if (e.keyword && e.event != events::kReask && e.kind != EntryKind::Response) {
      ++result.keyword_usage[*e.keyword];
    }
  }
  return result;
}

void print_summary(const SimulationResult& r, std::ostream& out) {
  int robot = 0, user = 0;
  for (const auto& e : r.transcript) {
    if (e.speaker == Speaker::Robot) ++robot;
    if (e.speaker == Speaker::User) ++user;
  }
  out << "seed " << r.config.rng_seed << ", logical end " << std::fixed << std::setprecision(1)
      << r.final_state.clock << " s\n";
  out << "robot utterances " << robot << ", user utterances " << user << "\n";
  out << "conversations " << r.stats.conversation_count;
  if (r.stats.mean) {
    out << ", mean turns " << std::setprecision(2) << *r.stats.mean << ", max " << r.stats.max;
  }
  out << "\n";
  for (const auto& c : r.stats.conversations) {
    out << "  conversation " << c.conversation_id << ": " << c.turns << " turns ("
        << c.robot_turns << " robot)\n";
  }
  if (!r.engine_usage.empty()) {
    out << "engines:";
    for (const auto& [engine, n] : r.engine_usage) out << ' ' << engine << '=' << n;
    out << "\n";
  }
  if (!r.keyword_usage.empty()) {
    out << "keywords:";
    for (const auto& [kw, n] : r.keyword_usage) out << ' ' << kw << '=' << n;
    out << "\n";
  }
}

}  // namespace tvc
