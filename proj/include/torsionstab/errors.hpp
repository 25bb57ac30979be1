#pragma once

#include <stdexcept>
#include <string>

namespace torsionstab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A matrix-exponential entry left the representable range.
struct OverflowError : Error {
    explicit OverflowError(double t)
        : Error("matrix exponential overflowed at t = " + std::to_string(t)), t(t) {}
    double t;
};

/// The iterative eigenvalue solver failed to converge.
struct ConvergenceError : Error {
    explicit ConvergenceError(int iterations)
        : Error("eigenvalue iteration failed to converge after " +
                std::to_string(iterations) + " iterations"),
          iterations(iterations) {}
    int iterations;
};

/// r(0) = 0: the trajectory is the equilibrium point, not a curve.
struct DegenerateInitialConditionError : Error {
    DegenerateInitialConditionError()
        : Error("initial condition is the equilibrium point (r0 = 0)") {}
};

/// The combinatorial reference path only supports small sizes.
struct UnsupportedSizeError : Error {
    UnsupportedSizeError(int k, int n)
        : Error("minor-sum reference supports k <= 3 and n <= 8, got k = " +
                std::to_string(k) + ", n = " + std::to_string(n)) {}
};

/// The velocity vanished numerically: no curve geometry at this point.
struct EquilibriumError : Error {
    explicit EquilibriumError(double t)
        : Error("trajectory velocity vanished at t = " + std::to_string(t)), t(t) {}
    double t;
};

/// Too few usable points survived to classify a trace.
struct InsufficientTraceError : Error {
    explicit InsufficientTraceError(int valid)
        : Error("trace has only " + std::to_string(valid) +
                " usable points; need at least 16"),
          valid(valid) {}
    int valid;
};

/// Eigenvalue clusters too close or inconsistent for structure detection.
struct IllConditionedSpectrumError : Error {
    using Error::Error;
};

/// A documented operation precondition was violated.
struct PreconditionError : Error {
    using Error::Error;
};

}  // namespace torsionstab
