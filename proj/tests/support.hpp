#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tvcompanion/embeddings.hpp"
#include "tvcompanion/resources.hpp"
#include "tvcompanion/wmd.hpp"

namespace tvc::testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(TVC_SOURCE_DIR) / rel;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tvc-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Store built from explicit rows.
inline EmbeddingStore make_store(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::vector<std::string> words;
  std::vector<double> comps;
  const std::size_t dim = rows.front().second.size();
  for (const auto& [w, v] : rows) {
    words.push_back(w);
    comps.insert(comps.end(), v.begin(), v.end());
  }
  return EmbeddingStore(dim, std::move(words), std::move(comps));
}

/// Optimal transport cost by vertex enumeration of the transport polytope.
///
/// Every vertex of {x >= 0 : row sums = a, column sums = b} is a basic
/// solution supported on m + n - 1 cells. We try every such cell subset,
/// solve the equality system on it (one column constraint is redundant and
/// dropped), keep the non-negative solutions that also satisfy the dropped
/// constraint, and return the cheapest. Exponential; for m, n <= 3 only.
inline double brute_force_transport(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<std::vector<double>>& cost) {
  const std::size_t m = a.size(), n = b.size();
  const std::size_t cells = m * n, k = m + n - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> pick(cells, 0);
  std::fill(pick.end() - static_cast<long>(k), pick.end(), 1);
  do {
    std::vector<std::size_t> basis;
    for (std::size_t c = 0; c < cells; ++c) {
      if (pick[c]) basis.push_back(c);
    }
    // Rows: m row constraints then the first n - 1 column constraints.
    std::vector<std::vector<long double>> A(k, std::vector<long double>(k + 1, 0.0L));
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = basis[j] / n, c = basis[j] % n;
      A[r][j] = 1.0L;
      if (c + 1 < n) A[m + c][j] = 1.0L;
    }
    for (std::size_t i = 0; i < m; ++i) A[i][k] = a[i];
    for (std::size_t c = 0; c + 1 < n; ++c) A[m + c][k] = b[c];

    bool singular = false;
    for (std::size_t col = 0; col < k && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r) {
        if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
      }
      if (std::fabs(A[piv][col]) < 1e-12L) {
        singular = true;
        break;
      }
      std::swap(A[piv], A[col]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        const long double f = A[r][col] / A[col][col];
        for (std::size_t c2 = col; c2 <= k; ++c2) A[r][c2] -= f * A[col][c2];
      }
    }
    if (singular) continue;

    std::vector<long double> x(k);
    bool feasible = true;
    for (std::size_t j = 0; j < k; ++j) {
      x[j] = A[j][k] / A[j][j];
      if (x[j] < -1e-12L) feasible = false;
    }
    if (!feasible) continue;
    long double last = 0.0L;
    for (std::size_t j = 0; j < k; ++j) {
      if (basis[j] % n == n - 1) last += x[j];
    }
    if (std::fabs(last - b[n - 1]) > 1e-9L) continue;

    long double total = 0.0L;
    for (std::size_t j = 0; j < k; ++j) total += x[j] * cost[basis[j] / n][basis[j] % n];
    best = std::min(best, static_cast<double>(total));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

inline double brute_force_wmd(const WeightedDoc& da, const WeightedDoc& db, const EmbeddingStore& store) {
  std::vector<double> a, b;
  std::vector<std::vector<double>> cost;
  for (const auto& x : da.items) {
    a.push_back(x.weight);
    cost.emplace_back();
    for (const auto& y : db.items) {
      cost.back().push_back(euclidean_distance(store.vector(x.word), store.vector(y.word)));
    }
  }
  for (const auto& y : db.items) b.push_back(y.weight);
  return brute_force_transport(a, b, cost);
}

/// Random normalized doc over `vocab` with 1..max_words distinct words.
template <class Rng>
WeightedDoc random_doc(Rng& rng, const std::vector<std::string>& vocab, std::size_t max_words) {
  std::uniform_int_distribution<std::size_t> count(1, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> mult(1, 5);
  std::vector<std::string> tokens;
  const std::size_t n = count(rng);
  std::vector<std::string> chosen;
  while (chosen.size() < n) {
    const auto& w = vocab[pick(rng)];
    if (std::find(chosen.begin(), chosen.end(), w) == chosen.end()) chosen.push_back(w);
  }
  for (const auto& w : chosen) {
    for (int r = mult(rng); r > 0; --r) tokens.push_back(w);
  }
  // Counts -> weights without going through nbow, so docs stay independent of it.
  WeightedDoc doc;
  std::sort(chosen.begin(), chosen.end());
  for (const auto& w : chosen) {
    const auto c = std::count(tokens.begin(), tokens.end(), w);
    doc.items.push_back({w, static_cast<double>(c) / static_cast<double>(tokens.size())});
  }
  return doc;
}

inline std::vector<std::string> numbered_words(std::size_t n, const std::string& prefix = "w") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline Resources demo_resources() {
  return load_resources(load_resource_paths_file(source_path("data/demo/resources.json").string()));
}

}  // namespace tvc::testing
