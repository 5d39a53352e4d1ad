#pragma once

#include <stdexcept>
#include <string>

namespace sls {

// Shape mismatch between matrices/vectors that must agree (A square, B rows == A rows, ...).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Eigensolver failures, non-PSD weights, and other numerical breakdowns.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Synthesis constraints cannot be met (masks too tight, FIR closure unreachable).
// Carries the worst constraint violation of the attempted solution.
struct InfeasibleError : std::runtime_error {
    double residual;

    InfeasibleError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
};

// Malformed inputs at the serialization boundary (bad JSON, ragged matrices, unknown names).
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sls
