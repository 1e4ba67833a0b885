#include <doctest.h>

#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support.hpp"
#include "tvcompanion/dialog.hpp"
#include "tvcompanion/errors.hpp"

using namespace tvc;
using namespace tvc::testing;

namespace {

struct Fixture {
  std::shared_ptr<const EmbeddingStore> store = std::make_shared<const EmbeddingStore>(
      make_store({{"dog", {0, 0}}, {"cat", {1, 0}}, {"ramen", {10, 0}}, {"noodle", {10.5, 0}},
                  {"news", {30, 0}}}));
  std::shared_ptr<const Tokenizer> tok = std::make_shared<const DefaultTokenizer>();

  DialogManager manager(std::vector<CorpusEntry> tv, std::vector<CorpusEntry> daily,
                        std::vector<CorpusEntry> news, DialogConfig config = {}) const {
    std::map<EngineId, std::shared_ptr<const DialogEngine>> engines{
        {EngineId::TvProgram, std::make_shared<const RetrievalEngine>(EngineId::TvProgram, std::move(tv))},
        {EngineId::DailyLife, std::make_shared<const RetrievalEngine>(EngineId::DailyLife, std::move(daily))},
        {EngineId::NewsSns, std::make_shared<const RetrievalEngine>(EngineId::NewsSns, std::move(news))}};
    return DialogManager(store, tok, std::move(engines), std::make_shared<const BuiltinGenerative>(), config);
  }
};

DialogContext ctx(int turn, std::string robot, std::string user) {
  return DialogContext{turn, std::move(robot), std::move(user), std::nullopt};
}

}  // namespace

TEST_SUITE("dialog") {
  TEST_CASE("unlock schedule") {
    CHECK(available_engines(1) == std::vector<EngineId>{EngineId::TvProgram});
    CHECK(available_engines(2) == std::vector<EngineId>{EngineId::TvProgram, EngineId::DailyLife});
    CHECK(available_engines(3) ==
          std::vector<EngineId>{EngineId::TvProgram, EngineId::DailyLife, EngineId::NewsSns});
    CHECK(available_engines(9).size() == 3);
    CHECK_THROWS_AS(available_engines(0), ContractError);
  }

  TEST_CASE("locked engines are never consulted") {
    Fixture f;
    auto m = f.manager({{"ramen", "tv ramen"}}, {{"dog", "daily dog"}}, {{"dog", "news dog"}});
    // Turn 1: the perfect dog cue lives in locked engines; tv cue is 10 away -> sim 1/11.
    auto r = m.respond(ctx(1, "dog", "dog"));
    CHECK(r.engine == EngineId::Generative);
    REQUIRE(r.best_retrieval_similarity);
    CHECK(*r.best_retrieval_similarity == doctest::Approx(1.0 / 11.0).epsilon(1e-9));
    CHECK(m.respond(ctx(2, "dog", "dog")).engine == EngineId::DailyLife);
  }

  TEST_CASE("threshold boundary") {
    Fixture f;
    // cat vs dog: distance 1 -> similarity 0.5.
    auto m = f.manager({{"cat", "meow"}}, {}, {});
    DialogConfig at{0.5};
    CHECK(m.respond(ctx(1, "dog", ""), at).reply == "meow");
    DialogConfig above{0.5000001};
    CHECK(m.respond(ctx(1, "dog", ""), above).engine == EngineId::Generative);
  }

  TEST_CASE("ties go to engine order, then candidate index") {
    Fixture f;
    auto m = f.manager({{"dog", "tv 0"}, {"dog", "tv 1"}}, {{"dog", "daily"}}, {{"dog", "news"}});
    auto r = m.respond(ctx(3, "dog", "dog"));
    CHECK(r.reply == "tv 0");
    CHECK(r.engine == EngineId::TvProgram);
    CHECK(*r.candidate_index == 0);
    CHECK(*r.similarity == 1.0);
  }

  TEST_CASE("news recency filter") {
    Fixture f;
    const double now = 1'600'000'000.0;
    auto m = f.manager({}, {}, {{"ramen", "old", now - 8 * 86400.0}, {"noodle", "fresh", now - 86400.0}});
    DialogConfig c;
    c.reference_time = now;
    CHECK(m.respond(ctx(3, "ramen", "ramen"), c).reply == "fresh");
    c.reference_time.reset();
    CHECK(m.respond(ctx(3, "ramen", "ramen"), c).reply == "old");
  }

  TEST_CASE("pruning never changes the answer") {
    std::mt19937_64 rng(12);
    auto words = numbered_words(40);
    auto store = std::make_shared<const EmbeddingStore>(synthetic_store(5, words, 8));
    auto tok = std::make_shared<const DefaultTokenizer>();
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    auto text = [&](int n) {
      std::string s;
      for (int i = 0; i < n; ++i) s += words[pick(rng)] + " ";
      return s;
    };
    for (int trial = 0; trial < 10; ++trial) {
      std::map<EngineId, std::shared_ptr<const DialogEngine>> engines;
      for (auto id : kRetrievalEngines) {
        std::vector<CorpusEntry> corpus;
        for (int i = 0; i < 80; ++i) corpus.push_back({text(4), "reply " + std::to_string(i)});
        engines[id] = std::make_shared<const RetrievalEngine>(id, corpus);
      }
      DialogManager m(store, tok, engines, std::make_shared<const BuiltinGenerative>());
      auto c = ctx(3, text(5), text(3));
      DialogConfig exhaustive;
      exhaustive.prune = false;
      exhaustive.wmd_threshold = 0.0;
      DialogConfig pruned = exhaustive;
      pruned.prune = true;
      pruned.candidate_cap = 1000;
      auto a = m.respond(c, exhaustive);
      auto b = m.respond(c, pruned);
      CHECK(a.reply == b.reply);
      CHECK(a.engine == b.engine);
      CHECK(*a.distance == doctest::Approx(*b.distance).epsilon(1e-12));
    }
  }

  TEST_CASE("context without in-vocabulary words falls back") {
    Fixture f;
    auto m = f.manager({{"dog", "woof"}}, {}, {});
    CHECK(m.respond(ctx(1, "zzz", "qqq")).engine == EngineId::Generative);
  }

  TEST_CASE("builtin generative hash") {
    // h = h*131 + c from 0: "" -> 0, "a" -> 97, "ab" -> 97*131 + 98 = 12805.
    CHECK(reply_hash("") == 0);
    CHECK(reply_hash("a") == 97);
    CHECK(reply_hash("ab") == 12805);
    BuiltinGenerative g;
    CHECK(g.reply(ctx(1, "", "")) == "I see.");            // 0 % 3
    CHECK(g.reply(ctx(1, "", "a")) == "Is that so?");      // 97 % 3 = 1
    CHECK(g.reply(ctx(1, "", "ab")) == "Is that so?");     // 12805 % 3 = 1
    CHECK(g.reply(ctx(1, "", "b")) == "Tell me more.");    // 98 % 3 = 2
  }

  TEST_CASE("corpus loader") {
    std::istringstream ok("{\"cue\": \"a\", \"reply\": \"b\"}\n\n{\"cue\": \"c\", \"reply\": \"d\", \"timestamp\": 5}\n");
    auto entries = load_corpus(ok);
    REQUIRE(entries.size() == 2);
    CHECK(*entries[1].timestamp == 5.0);
    std::istringstream bad("{\"cue\": \"a\"}\n");
    CHECK_THROWS_AS(load_corpus(bad), DataError);
  }

  TEST_CASE("external generative endpoint and fallback") {
    httplib::Server server;
    server.Post("/reply", [](const httplib::Request& req, httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body);
      res.set_content(nlohmann::json{{"reply", "echo: " + j["context_text"].get<std::string>()}}.dump(),
                      "application/json");
    });
    server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content("{\"reply\": \"late\"}", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    auto builtin = std::make_shared<const BuiltinGenerative>();

    ExternalGenerative ok(base + "/reply", builtin);
    CHECK(ok.reply(ctx(1, "hi", "there")) == "echo: hi there");
    ExternalGenerative slow(base + "/slow", builtin, std::chrono::milliseconds(200));
    CHECK(slow.reply(ctx(1, "hi", "")) == "I see.");
    ExternalGenerative missing(base + "/nope", builtin);
    CHECK(missing.reply(ctx(1, "hi", "")) == "I see.");
    server.stop();
    t.join();
    ExternalGenerative down(base + "/reply", builtin, std::chrono::milliseconds(200));
    CHECK(down.reply(ctx(1, "hi", "")) == "I see.");
  }
}
