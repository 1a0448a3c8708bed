#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "elstab/linalg.hpp"

namespace elstab {

/// A parameter or argument lies outside the admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver a trustworthy value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pointwise evaluation failed (e.g. singular Jacobian) at a specific location.
class EvaluationError : public NumericalError {
 public:
  EvaluationError(const std::string& what, Vec2 where) : NumericalError(what), point(where) {}
  Vec2 point;
};

/// Element assembly failed; carries the element index.
class AssemblyError : public NumericalError {
 public:
  AssemblyError(const std::string& what, std::size_t elem) : NumericalError(what), element(elem) {}
  std::size_t element;
};

/// Iterative solver hit its iteration cap.
class ConvergenceFailure : public NumericalError {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> history)
      : NumericalError(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// The analytic hypothesis of an estimate fails (e.g. gradient not in L^q).
class HypothesisViolation : public std::domain_error {
 public:
  HypothesisViolation(const std::string& what, double threshold)
      : std::domain_error(what), critical_exponent(threshold) {}
  double critical_exponent;
};

}  // namespace elstab
