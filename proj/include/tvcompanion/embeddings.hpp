#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tvcompanion/errors.hpp"

namespace tvc {

/// Immutable word -> vector map. Words are matched case-sensitively.
///
/// Vectors live in one contiguous buffer in load order; lookups hand out
/// spans into it. Safe to share across threads once constructed.
class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dimension, std::vector<std::string> words,
                 std::vector<double> components);

  std::size_t dimension() const { return dimension_; }
  std::size_t vocab_size() const { return words_.size(); }

  bool contains(std::string_view word) const;
  /// Throws ContractError for out-of-vocabulary words.
  std::span<const double> vector(std::string_view word) const;
  /// Words in load order.
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const EmbeddingStore& other) const;

 private:
  std::size_t dimension_;
  std::vector<std::string> words_;
  std::vector<double> components_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses the "<count> <dimension>" header + "<word> <reals...>" text format.
/// Duplicate words keep the first row; each duplicate adds one warning.
EmbeddingStore load_vectors(std::istream& in, Warnings* warnings = nullptr);
EmbeddingStore load_vectors_file(const std::string& path, Warnings* warnings = nullptr);

/// Writes the store in the same text format load_vectors reads, using
/// round-trip precision for every component.
void save_vectors(const EmbeddingStore& store, std::ostream& out);

/// Vocabulary key for a surface form: the surface itself, or for multiword
/// surfaces the underscore-joined phrase ("ice cream" -> "ice_cream").
/// Empty when neither form is in the store.
std::string vocab_key(std::string_view surface, const EmbeddingStore& store);

double cosine_similarity(std::string_view a, std::string_view b, const EmbeddingStore& store);
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Deterministic unit-norm vectors derived from (seed, word). Used for fixtures.
EmbeddingStore synthetic_store(std::uint64_t seed, const std::vector<std::string>& words,
                               std::size_t dimension);

}  // namespace tvc
