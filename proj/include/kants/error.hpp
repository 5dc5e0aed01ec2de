#pragma once

#include <stdexcept>
#include <string>

namespace kants {

/// Bad input: malformed configuration, shapes, files or values.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an API contract (e.g. a trace from a different network).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Degree-0 splines have no derivative.
class UnsupportedDegreeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A forward pass produced Inf/NaN.
class NumericOverflowError : public std::runtime_error {
 public:
  NumericOverflowError(std::size_t layer, const std::string& what)
      : std::runtime_error(what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// Training loss became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace kants
