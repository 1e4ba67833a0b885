#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tvc {

/// Malformed or unusable input data (vector files, corpora, transcripts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-fatal loader diagnostics collected in encounter order.
using Warnings = std::vector<std::string>;

}  // namespace tvc
