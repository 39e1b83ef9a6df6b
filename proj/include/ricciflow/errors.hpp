// Error types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace ricciflow {

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-positive or otherwise malformed user data.
struct InvalidInput : FlowError {
  using FlowError::FlowError;
};

// The product constraint ABC = product drifted past the guard; signals
// integrator trouble, not user error.
struct NormalizationViolation : FlowError {
  using FlowError::FlowError;
};

// Evaluation outside a closed-form solution's maximal interval.
struct DomainError : FlowError {
  using FlowError::FlowError;
};

// Closed-form initial data that does not satisfy the solution's constraint.
struct InconsistentInitialData : FlowError {
  using FlowError::FlowError;
};

// No asymptotic law tabulated for the requested class/case pair.
struct UnknownCase : FlowError {
  using FlowError::FlowError;
};

// Too few samples in the window a fit or estimate needs.
struct InsufficientData : FlowError {
  using FlowError::FlowError;
};

// The trajectory is not in the case the operation applies to.
struct WrongCase : FlowError {
  using FlowError::FlowError;
};

// Bisection endpoints carry the same classification label.
struct SameLabel : FlowError {
  using FlowError::FlowError;
};

} // namespace ricciflow
