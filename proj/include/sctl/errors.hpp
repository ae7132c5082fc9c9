#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sctl {

// Rejected argument, malformed config, or misuse of an API (CLI exit code 1).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mismatched vector/matrix dimensions.
class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

// Numerical failure: non-convergence, singular systems (CLI exit code 2).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Controller design impossible for the given model (e.g. uncontrollable pair).
class DesignError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Plant state left the finite/bounded region.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericError(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace sctl
