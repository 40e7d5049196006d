#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hths {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation requested for a prior family that does not support it.
class UnsupportedFamilyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure on valid input
// (non-convergence, NaN, divergence, underflow).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : NumericError(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

class UnderflowError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A sampler state left the representable box or became non-finite.
class DivergedChainError : public NumericError {
 public:
  explicit DivergedChainError(const std::string& what, std::size_t iteration = 0)
      : NumericError(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace hths
