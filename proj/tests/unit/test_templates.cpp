#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "tvcompanion/errors.hpp"
#include "tvcompanion/templates.hpp"

using namespace tvc;
using namespace tvc::testing;

namespace {

Keyword kw(std::string surface) {
  Keyword k;
  k.surface = std::move(surface);
  return k;
}

}  // namespace

TEST_SUITE("templates") {
  TEST_CASE("template length ignores the slot and whitespace, counts code points") {
    CHECK(template_length("I like ***") == 5);
    CHECK(template_length("*** looks fun to watch") == 15);  // 5 + 3 + 2 + 5
    CHECK(template_length("caf\xC3\xA9 ***") == 4);
    // The built-in defaults fit the limit.
    TemplateConfig config;
    CHECK(template_length(config.default_disclosure) <= config.max_template_chars);
    CHECK(template_length(config.default_question) <= config.max_template_chars);
  }

  TEST_CASE("loader rejects bad records with one warning each") {
    auto store = load_vectors_file(source_path("data/demo/vectors.txt").string());
    Warnings w;
    auto corpus = load_templates_file(source_path("tests/fixtures/templates_mixed.tsv").string(), store, {}, &w);
    REQUIRE(corpus.templates().size() == 2);
    CHECK(corpus.templates()[0].id == 1);
    CHECK(corpus.templates()[1].pattern == "Do you like ***");
    CHECK(w.size() == 5);
    bool saw_length = false;
    for (const auto& msg : w) saw_length |= msg.find("limit is 20") != std::string::npos;
    CHECK(saw_length);
  }

  TEST_CASE("a file with nothing valid is a data error") {
    auto store = make_store({{"like", {1.0}}});
    std::istringstream in("# only comments\nquestion\tlike\tno slot\n");
    CHECK_THROWS_AS(load_templates(in, store), DataError);
  }

  TEST_CASE("selection by anchor cosine, ties to lowest id") {
    auto store = make_store({{"dog", {1, 0}}, {"pet", {0.9, 0.1}}, {"food", {0, 1}}, {"animal", {0.9, 0.1}}});
    TemplateCorpus corpus({{1, TemplateKind::Disclosure, "food", "I want to eat ***"},
                           {2, TemplateKind::Disclosure, "pet", "I like ***"},
                           {3, TemplateKind::Disclosure, "animal", "I love ***"},
                           {4, TemplateKind::Question, "food", "Do you eat ***"}});
    CHECK(select_template(kw("dog"), TemplateKind::Disclosure, corpus, store).id == 2);
    CHECK(select_template(kw("dog"), TemplateKind::Question, corpus, store).id == 4);
    // OOV keyword -> default template.
    const auto& d = select_template(kw("xylophone"), TemplateKind::Question, corpus, store);
    CHECK(d.id == 0);
    CHECK(d.pattern == "What do you think about ***");
  }

  TEST_CASE("realize substitutes verbatim and terminates questions") {
    UtteranceTemplate q{8, TemplateKind::Question, "like", "Do you like ***"};
    auto u = realize(q, kw("elephant"), 3.0);
    CHECK(u.text == "Do you like elephant?");
    CHECK(u.kind == UtteranceKind::Question);
    CHECK(u.template_id == 8);
    CHECK(u.produced_at == 3.0);
    CHECK_FALSE(u.engine.has_value());
    UtteranceTemplate q2{9, TemplateKind::Question, "like", "Really, *** ?"};
    CHECK(realize(q2, kw("x")).text == "Really, x ?");
    UtteranceTemplate d{1, TemplateKind::Disclosure, "like", "I like ***"};
    CHECK(realize(d, kw("*** odd")).text == "I like *** odd");
  }

  TEST_CASE("bundled corpus: elephant example") {
    auto res = demo_resources();
    auto& store = *res.deps.store;
    auto& corpus = *res.deps.templates;
    const auto& dt = select_template(kw("elephant"), TemplateKind::Disclosure, corpus, store);
    CHECK(dt.pattern == "I like ***");
    CHECK(realize(dt, kw("elephant")).text == "I like elephant");
    const auto& qt = select_template(kw("elephant"), TemplateKind::Question, corpus, store);
    CHECK(realize(qt, kw("elephant")).text == "Do you like elephant?");
  }

  TEST_CASE("save and reload round trip") {
    auto store = load_vectors_file(source_path("data/demo/vectors.txt").string());
    auto corpus = load_templates_file(source_path("data/demo/templates.tsv").string(), store);
    std::stringstream buf;
    save_templates(corpus, buf);
    auto back = load_templates(buf, store);
    REQUIRE(back.templates().size() == corpus.templates().size());
    for (std::size_t i = 0; i < corpus.templates().size(); ++i) {
      CHECK(back.templates()[i].pattern == corpus.templates()[i].pattern);
      CHECK(back.templates()[i].anchor == corpus.templates()[i].anchor);
      CHECK(back.templates()[i].kind == corpus.templates()[i].kind);
    }
  }
}
