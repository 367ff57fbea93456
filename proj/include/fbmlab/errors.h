#pragma once

#include <stdexcept>
#include <string>

namespace fbmlab {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative time, eps <= 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operation requires H > 1/2 and was called outside that range.
class ScopeError : public Error {
public:
  using Error::Error;
};

/// Problem size exceeds a configured cap.
class SizeError : public Error {
public:
  using Error::Error;
};

/// Factorisation, quadrature or other numerics failed to reach the requested accuracy.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Circulant embedding produced too much negative spectral mass.
class EmbeddingError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Matrix condition number above the admissible threshold.
class ConditioningError : public NumericalError {
public:
  ConditioningError(const std::string& what, double condition)
      : NumericalError(what + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

private:
  double condition_;
};

/// Path grid does not contain the nodes a discretisation needs.
class AlignmentError : public Error {
public:
  using Error::Error;
};

/// Reference grid not fine enough relative to the coarse grid.
class RefinementError : public Error {
public:
  using Error::Error;
};

/// Level requested outside the range a local-time profile covers.
class CoverageError : public Error {
public:
  using Error::Error;
};

/// Not enough usable points for a regression.
class FitError : public Error {
public:
  using Error::Error;
};

/// Experiment plan violates its invariants or its memory budget.
class PlanError : public Error {
public:
  using Error::Error;
};

}  // namespace fbmlab
