#include "tvcompanion/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tvcompanion/hashing.hpp"

namespace tvc {

namespace {

std::string_view strip_eol(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ')) {
    line.remove_suffix(1);
  }
  return line;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(' ', start);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dimension, std::vector<std::string> words,
                               std::vector<double> components)
    : dimension_(dimension), words_(std::move(words)), components_(std::move(components)) {
  if (dimension_ == 0) throw ContractError("embedding dimension must be positive");
  if (words_.empty()) throw DataError("empty vocabulary");
  if (components_.size() != words_.size() * dimension_) {
    throw ContractError("component buffer does not match vocab_size * dimension");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw ContractError("duplicate word in store: " + words_[i]);
    }
  }
  for (double c : components_) {
    if (!std::isfinite(c)) throw DataError("non-finite vector component");
  }
}

bool EmbeddingStore::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::span<const double> EmbeddingStore::vector(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw ContractError("out-of-vocabulary word: " + std::string(word));
  return {components_.data() + it->second * dimension_, dimension_};
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
  return dimension_ == other.dimension_ && words_ == other.words_ &&
         components_ == other.components_;
}

EmbeddingStore load_vectors(std::istream& in, Warnings* warnings) {
  std::string raw;
  if (!std::getline(in, raw)) throw DataError("missing header line");
  auto header = split_spaces(strip_eol(raw));
  std::size_t declared = 0;
  std::size_t dimension = 0;
  if (header.size() != 2 || !parse_number(header[0], declared) ||
      !parse_number(header[1], dimension) || dimension == 0) {
    throw DataError("malformed header, expected \"<count> <dimension>\"");
  }

  std::vector<std::string> words;
  std::vector<double> components;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_eol(raw);
    if (line.empty()) continue;
    ++rows;
    auto fields = split_spaces(line);
    if (fields.size() != dimension + 1) {
      throw DataError(where(line_no) + "expected " + std::to_string(dimension) +
                      " components, found " + std::to_string(fields.size() - 1));
    }
    if (fields[0].empty()) throw DataError(where(line_no) + "empty word");
    std::vector<double> row(dimension);
    for (std::size_t d = 0; d < dimension; ++d) {
      if (!parse_number(fields[d + 1], row[d])) {
        throw DataError(where(line_no) + "unparseable component '" + std::string(fields[d + 1]) + "'");
      }
      if (!std::isfinite(row[d])) throw DataError(where(line_no) + "non-finite component");
    }
    std::string word(fields[0]);
    if (seen.count(word)) {
      if (warnings) warnings->push_back(where(line_no) + "duplicate word '" + word + "' ignored");
      continue;
    }
    seen.emplace(word, words.size());
    words.push_back(std::move(word));
    components.insert(components.end(), row.begin(), row.end());
  }
  if (words.empty()) throw DataError("empty vocabulary");
  if (rows != declared && warnings) {
    warnings->push_back("header declares " + std::to_string(declared) + " rows, found " +
                        std::to_string(rows));
  }
  return EmbeddingStore(dimension, std::move(words), std::move(components));
}

EmbeddingStore load_vectors_file(const std::string& path, Warnings* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vector file: " + path);
  return load_vectors(in, warnings);
}

void save_vectors(const EmbeddingStore& store, std::ostream& out) {
  out << store.vocab_size() << ' ' << store.dimension() << '\n';
  std::ostringstream row;
  row << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& word : store.words()) {
    row.str({});
    row << word;
    for (double c : store.vector(word)) row << ' ' << c;
    out << row.str() << '\n';
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("vector dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ContractError("cosine of a zero-norm vector");
  // Symmetric in (a, b): the product na*nb commutes exactly.
  return dot / std::sqrt(na * nb);
}

std::string vocab_key(std::string_view surface, const EmbeddingStore& store) {
  if (store.contains(surface)) return std::string(surface);
  if (surface.find(' ') == std::string_view::npos) return {};
  std::string joined(surface);
  for (auto& c : joined) {
    if (c == ' ') c = '_';
  }
  return store.contains(joined) ? joined : std::string{};
}

double cosine_similarity(std::string_view a, std::string_view b, const EmbeddingStore& store) {
  return cosine_similarity(store.vector(a), store.vector(b));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("vector dimensions differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

EmbeddingStore synthetic_store(std::uint64_t seed, const std::vector<std::string>& words,
                               std::size_t dimension) {
  if (words.empty()) throw ContractError("synthetic_store needs at least one word");
  if (dimension < 2) throw ContractError("synthetic_store needs dimension >= 2");

  std::vector<std::string> kept;
  std::vector<double> components;
  std::unordered_map<std::string, bool> seen;
  for (const auto& word : words) {
    if (!seen.emplace(word, true).second) continue;
    std::uint64_t state = seed ^ (fnv1a64(word) * 0x9e3779b97f4a7c15ull);
    std::vector<double> v(dimension);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (auto& c : v) {
        c = 2.0 * unit_interval(splitmix64(state)) - 1.0;
        norm2 += c * c;
      }
    } while (norm2 < 1e-12);
    double norm = std::sqrt(norm2);
    for (auto& c : v) c /= norm;
    kept.push_back(word);
    components.insert(components.end(), v.begin(), v.end());
  }
  return EmbeddingStore(dimension, std::move(kept), std::move(components));
}

}  // namespace tvc
