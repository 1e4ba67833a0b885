#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "tvcompanion/embeddings.hpp"
#include "tvcompanion/errors.hpp"

using namespace tvc;
using tvc::testing::make_store;

TEST_SUITE("embeddings") {
  TEST_CASE("load_vectors parses header and rows") {
    std::istringstream in("2 3\ncat 1 0 0\ndog 0 1 0\n");
    auto store = load_vectors(in);
    CHECK(store.dimension() == 3);
    CHECK(store.vocab_size() == 2);
    CHECK(store.contains("cat"));
    CHECK_FALSE(store.contains("Cat"));
    CHECK(store.vector("dog")[1] == 1.0);
    CHECK_THROWS_AS(store.vector("bird"), ContractError);
  }

  TEST_CASE("duplicates keep the first row and warn") {
    std::istringstream in("3 2\na 1 2\na 3 4\nb 5 6\n");
    Warnings w;
    auto store = load_vectors(in, &w);
    CHECK(store.vocab_size() == 2);
    CHECK(store.vector("a")[0] == 1.0);
    REQUIRE(w.size() >= 1);
    CHECK(w[0].find("a") != std::string::npos);
  }

  TEST_CASE("header count mismatch warns but loads") {
    std::istringstream in("5 2\na 1 2\nb 3 4\n");
    Warnings w;
    auto store = load_vectors(in, &w);
    CHECK(store.vocab_size() == 2);
    CHECK(w.size() == 1);
  }

  TEST_CASE("malformed input is a data error") {
    for (const char* text : {"", "x y\n", "1 2\na 1\n", "1 2\na 1 nan\n", "1 2\na 1 2 3\n",
                             "0 2\n", "1 0\na\n"}) {
      std::istringstream in(text);
      CHECK_THROWS_AS(load_vectors(in), DataError);
    }
  }

  TEST_CASE("save/load round trip is exact") {
    auto store = synthetic_store(7, {"alpha", "beta", "gamma"}, 5);
    std::stringstream buf;
    save_vectors(store, buf);
    auto back = load_vectors(buf);
    CHECK(back == store);
  }

  TEST_CASE("cosine similarity hand value") {
    // (1,0) vs (1,1): 1 / (1 * sqrt 2)
    const double oracle = 1.0 / std::sqrt(2.0);
    auto store = make_store({{"x", {1.0, 0.0}}, {"y", {1.0, 1.0}}});
    CHECK(cosine_similarity("x", "y", store) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(cosine_similarity("y", "x", store) == cosine_similarity("x", "y", store));
    CHECK(cosine_similarity("x", "x", store) == doctest::Approx(1.0));
  }

  TEST_CASE("euclidean distance hand value") {
    // (0,0,0) to (1,2,2) is 3
    auto store = make_store({{"o", {0, 0, 0}}, {"p", {1, 2, 2}}});
    CHECK(euclidean_distance(store.vector("o"), store.vector("p")) == doctest::Approx(3.0));
  }

  TEST_CASE("synthetic store is deterministic and unit norm") {
    auto words = tvc::testing::numbered_words(20);
    auto a = synthetic_store(42, words, 8);
    auto b = synthetic_store(42, words, 8);
    auto c = synthetic_store(43, words, 8);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (const auto& w : words) {
      double n2 = 0;
      for (double x : a.vector(w)) n2 += x * x;
      CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // A word's vector does not depend on which other words are present.
    auto single = synthetic_store(42, {"w3"}, 8);
    CHECK(std::equal(single.vector("w3").begin(), single.vector("w3").end(), a.vector("w3").begin()));
  }

  TEST_CASE("vocab_key handles multiword surfaces") {
    auto store = make_store({{"ice_cream", {1, 0}}, {"tea", {0, 1}}});
    CHECK(vocab_key("tea", store) == "tea");
    CHECK(vocab_key("ice cream", store) == "ice_cream");
    CHECK(vocab_key("coffee", store).empty());
  }

  TEST_CASE("bundled demo vectors load cleanly") {
    Warnings w;
    auto store = load_vectors_file(tvc::testing::source_path("data/demo/vectors.txt").string(), &w);
    CHECK(w.empty());
    CHECK(store.contains("elephant"));
    CHECK(store.contains("internet"));
  }
}
