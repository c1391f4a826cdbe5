#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperkge {

// Base class for all errors raised by the library. The CLI maps the three
// subclasses below to exit codes 1 (usage), 2 (data), 3 (numeric).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Two hypercomplex vectors of different dimension were combined.
class DimensionMismatchError : public NumericError {
 public:
  DimensionMismatchError(std::size_t lhs, std::size_t rhs)
      : NumericError("dimension mismatch: " + std::to_string(lhs) + " vs " +
                     std::to_string(rhs)),
        lhs_dim(lhs),
        rhs_dim(rhs) {}

  std::size_t lhs_dim;
  std::size_t rhs_dim;
};

// A per-dimension norm fell below the normalization guard.
class DegenerateError : public NumericError {
 public:
  DegenerateError(std::size_t dimension, const std::string& context)
      : NumericError("degenerate " + context + ": norm below eps at dimension " +
                     std::to_string(dimension)),
        dimension(dimension) {}

  std::size_t dimension;
};

}  // namespace hyperkge
