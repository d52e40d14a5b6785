#pragma once

#include <stdexcept>
#include <string>

namespace proofmatch {

// Malformed input files, inconsistent corpora, invalid configurations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A training run produced non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace proofmatch
