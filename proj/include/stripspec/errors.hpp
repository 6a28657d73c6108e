#pragma once

#include <stdexcept>
#include <string>

namespace stripspec {

// Numerical failure during an otherwise well-posed computation.
// Preconditions violated by the caller throw std::invalid_argument instead.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear solve hit a (near-)singular operator. `proximity` estimates the
// distance from the shift to the spectrum of the restricted operator.
struct SingularSolveError : NumericalError {
  double proximity;
  SingularSolveError(const std::string& msg, double prox)
      : NumericalError(msg), proximity(prox) {}
};

// A matrix that must have full rank failed the relative rank test.
struct RankDeficiencyError : NumericalError {
  double smin;
  double smax;
  RankDeficiencyError(const std::string& msg, double smin_, double smax_)
      : NumericalError(msg), smin(smin_), smax(smax_) {}
};

}  // namespace stripspec
