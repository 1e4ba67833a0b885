#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tvcompanion/embeddings.hpp"

namespace tvc {

struct WeightedWord {
  std::string word;
  double weight;

  bool operator==(const WeightedWord&) const = default;
};

/// Normalized bag of words: unique in-vocabulary words with positive
/// weights summing to 1. Items are kept sorted by word.
struct WeightedDoc {
  std::vector<WeightedWord> items;

  bool operator==(const WeightedDoc&) const = default;
};

struct TransportPlan {
  std::map<std::pair<std::string, std::string>, double> flows;
  double cost = 0.0;
};

struct WmdResult {
  double distance;
  TransportPlan plan;
};

/// Throws ContractError if the doc breaks a WeightedDoc invariant for `store`.
void validate(const WeightedDoc& doc, const EmbeddingStore& store);

/// Drops OOV tokens and normalizes counts. Throws ContractError when the
/// token list is empty or nothing in-vocabulary remains.
WeightedDoc nbow(const std::vector<std::string>& tokens, const EmbeddingStore& store);

/// Exact Word Mover's Distance with Euclidean ground cost.
///
/// Masses are quantized to integer units of 1e-9 (largest-remainder
/// rounding, so each side sums to exactly 1e9 units) and the transport
/// problem is solved as a min-cost flow with successive shortest paths.
/// The returned plan's cost is the reported distance.
WmdResult wmd(const WeightedDoc& a, const WeightedDoc& b, const EmbeddingStore& store);

/// max of the two one-sided relaxations; a lower bound on wmd().
double relaxed_wmd(const WeightedDoc& a, const WeightedDoc& b, const EmbeddingStore& store);

/// 1 / (1 + distance). Throws ContractError for negative or non-finite input.
double to_similarity(double distance);

/// Units per unit of mass used by the exact solver.
inline constexpr long long kMassScale = 1'000'000'000LL;

/// Integer masses summing to exactly kMassScale (largest-remainder rounding,
/// ties to the lower index). Exposed for tests.
std::vector<long long> quantize_masses(const std::vector<double>& weights);

}  // namespace tvc
