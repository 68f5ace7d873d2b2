#pragma once

#include <stdexcept>
#include <string>

namespace defectchain {

/// Invalid argument or precondition violation (bad site labels, ranges,
/// mismatched bases).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure: eigensolver breakdown, integrator step underflow.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double last_stable_step = 0.0)
      : std::runtime_error(what), last_stable_step_(last_stable_step) {}

  /// Smallest step that still produced a finite run, 0 when not applicable.
  double last_stable_step() const noexcept { return last_stable_step_; }

 private:
  double last_stable_step_;
};

}  // namespace defectchain
