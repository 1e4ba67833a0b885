#include "tvcompanion/wmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tvc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relaxations must beat the current label by this much. Rounding can make a
// zero-cost residual cycle look slightly negative, which would otherwise
// leave a cycle in the parent pointers.
constexpr double kRelaxEps = 1e-12;

using Matrix = std::vector<std::vector<double>>;

Matrix ground_costs(const WeightedDoc& a, const WeightedDoc& b, const EmbeddingStore& store) {
  Matrix cost(a.items.size(), std::vector<double>(b.items.size()));
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    auto va = store.vector(a.items[i].word);
    for (std::size_t j = 0; j < b.items.size(); ++j) {
      cost[i][j] = euclidean_distance(va, store.vector(b.items[j].word));
    }
  }
  return cost;
}

std::vector<double> weights_of(const WeightedDoc& doc) {
  std::vector<double> w;
  w.reserve(doc.items.size());
  for (const auto& item : doc.items) w.push_back(item.weight);
  return w;
}

// Successive shortest paths on the bipartite residual graph. Nodes 0..n-1 are
// supplies, n..n+m-1 demands. Forward arcs i->j are uncapacitated; backward
// arcs j->i exist while flow[i][j] > 0. Bellman-Ford handles the negative
// backward costs; graphs here have at most a few dozen nodes.
std::vector<std::vector<long long>> min_cost_flow(const Matrix& cost,
                                                  std::vector<long long> supply,
                                                  std::vector<long long> demand) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  const std::size_t nodes = n + m;
  std::vector<std::vector<long long>> flow(n, std::vector<long long>(m, 0));

  long long remaining = std::accumulate(supply.begin(), supply.end(), 0LL);
  std::vector<double> dist(nodes);
  std::vector<std::size_t> parent(nodes);
  const std::size_t none = nodes;

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), none);
    for (std::size_t i = 0; i < n; ++i) {
      if (supply[i] > 0) dist[i] = 0.0;
    }
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] == kInf) continue;
        for (std::size_t j = 0; j < m; ++j) {
          double nd = dist[i] + cost[i][j];
          if (nd < dist[n + j] - kRelaxEps) {
            dist[n + j] = nd;
            parent[n + j] = i;
            changed = true;
          }
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (dist[n + j] == kInf) continue;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i][j] <= 0) continue;
          double nd = dist[n + j] - cost[i][j];
          if (nd < dist[i] - kRelaxEps) {
            dist[i] = nd;
            parent[i] = n + j;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    std::size_t target = none;
    for (std::size_t j = 0; j < m; ++j) {
      if (demand[j] > 0 && dist[n + j] < kInf && (target == none || dist[n + j] < dist[target])) {
        target = n + j;
      }
    }
    if (target == none) break;  // unreachable: forward arcs are complete

    // Walk back to the origin supply node collecting the bottleneck.
    long long push = demand[target - n];
    std::size_t v = target;
    for (std::size_t steps = 0; parent[v] != none; ++steps) {
      if (steps > nodes) throw std::logic_error("wmd: cycle in shortest-path tree");
      std::size_t u = parent[v];
      if (u >= n) push = std::min(push, flow[v][u - n]);  // backward arc j->i
      v = u;
    }
    push = std::min(push, supply[v]);

    v = target;
    while (parent[v] != none) {
      std::size_t u = parent[v];
      if (u < n) {
        flow[u][v - n] += push;
      } else {
        flow[v][u - n] -= push;
      }
      v = u;
    }
    supply[v] -= push;
    demand[target - n] -= push;
    remaining -= push;
  }
  return flow;
}

}  // namespace

void validate(const WeightedDoc& doc, const EmbeddingStore& store) {
  if (doc.items.empty()) throw ContractError("weighted doc is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < doc.items.size(); ++i) {
    const auto& item = doc.items[i];
    if (!(item.weight > 0.0)) throw ContractError("non-positive weight for '" + item.word + "'");
    if (!store.contains(item.word)) throw ContractError("out-of-vocabulary word '" + item.word + "'");
    for (std::size_t k = 0; k < i; ++k) {
      if (doc.items[k].word == item.word) throw ContractError("duplicate word '" + item.word + "'");
    }
    total += item.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("weights do not sum to 1");
}

WeightedDoc nbow(const std::vector<std::string>& tokens, const EmbeddingStore& store) {
  if (tokens.empty()) throw ContractError("nbow of an empty token list");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& token : tokens) {
    if (!store.contains(token)) continue;
    ++counts[token];
    ++total;
  }
  if (total == 0) throw ContractError("all tokens are out of vocabulary");
  WeightedDoc doc;
  doc.items.reserve(counts.size());
  for (const auto& [word, count] : counts) {
    doc.items.push_back({word, static_cast<double>(count) / static_cast<double>(total)});
  }
  return doc;
}

std::vector<long long> quantize_masses(const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<long long> units(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = weights[i] / total * static_cast<double>(kMassScale);
    double floor_value = std::floor(exact);
    units[i] = static_cast<long long>(floor_value);
    assigned += units[i];
    remainders.emplace_back(exact - floor_value, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  long long missing = kMassScale - assigned;
  for (std::size_t k = 0; missing > 0; k = (k + 1) % remainders.size(), --missing) {
    ++units[remainders[k].second];
  }
  // Only reachable if floating error overshoots; take from the largest.
  for (; missing < 0; ++missing) --*std::max_element(units.begin(), units.end());
  return units;
}

WmdResult wmd(const WeightedDoc& a, const WeightedDoc& b, const EmbeddingStore& store) {
  validate(a, store);
  validate(b, store);
  const Matrix cost = ground_costs(a, b, store);
  const auto flow = min_cost_flow(cost, quantize_masses(weights_of(a)), quantize_masses(weights_of(b)));

  WmdResult result{0.0, {}};
  const double scale = static_cast<double>(kMassScale);
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    for (std::size_t j = 0; j < b.items.size(); ++j) {
      if (flow[i][j] == 0) continue;
      double mass = static_cast<double>(flow[i][j]) / scale;
      result.plan.flows[{a.items[i].word, b.items[j].word}] = mass;
      result.plan.cost += mass * cost[i][j];
    }
  }
  result.distance = result.plan.cost;
  return result;
}

double relaxed_wmd(const WeightedDoc& a, const WeightedDoc& b, const EmbeddingStore& store) {
  validate(a, store);
  validate(b, store);
  const Matrix cost = ground_costs(a, b, store);
  // Quantized masses match the exact solver so the bound holds term by term.
  const auto qa = quantize_masses(weights_of(a));
  const auto qb = quantize_masses(weights_of(b));
  const double scale = static_cast<double>(kMassScale);

  double forward = 0.0;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    double nearest = *std::min_element(cost[i].begin(), cost[i].end());
    forward += static_cast<double>(qa[i]) / scale * nearest;
  }
  double backward = 0.0;
  for (std::size_t j = 0; j < qb.size(); ++j) {
    double nearest = kInf;
    for (std::size_t i = 0; i < qa.size(); ++i) nearest = std::min(nearest, cost[i][j]);
    backward += static_cast<double>(qb[j]) / scale * nearest;
  }
  return std::max(forward, backward);
}

double to_similarity(double distance) {
  if (!std::isfinite(distance) || distance < 0.0) {
    throw ContractError("similarity needs a finite non-negative distance");
  }
  return 1.0 / (1.0 + distance);
}

}  // namespace tvc
