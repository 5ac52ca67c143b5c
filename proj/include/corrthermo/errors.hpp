#pragma once

#include <stdexcept>
#include <string>

namespace corrthermo {

// Shape or size mismatch, including tensor products that would exceed the
// configured maximum total dimension.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An operator required to be Hermitian is not, beyond tolerance.
struct NonHermitianError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A matrix required to be a density matrix fails trace/positivity/hermiticity.
struct StateValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A physical invariant that the engine guarantees was violated numerically.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature or series evaluation failed to reach the requested tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed-step integrator detected that the step is too coarse (positivity
// floor violated); carries a suggested smaller step.
struct StepSizeError : std::runtime_error {
    StepSizeError(const std::string& what, double suggested)
        : std::runtime_error(what), suggested_dt(suggested) {}
    double suggested_dt;
};

// Scenario document is malformed; message names the offending field.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace corrthermo
