#pragma once

#include <stdexcept>
#include <string>

namespace rcmdp {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A kernel row, policy row, or distribution fails stochasticity, or an
/// entry is outside its admissible range.
struct StructuralError : Error {
    using Error::Error;
};

/// The linear system defining a stationary distribution or relative value
/// function is rank-deficient beyond tolerance.
struct SingularChain : Error {
    using Error::Error;
};

/// An ambiguity-set subproblem reports infeasibility beyond tolerance.
struct InfeasibleSet : Error {
    using Error::Error;
};

/// A stochastic-approximation iterate exceeded its blow-up bound.
struct DivergenceError : Error {
    using Error::Error;
};

/// A fixed-point computation stalled above its residual tolerance.
struct NoConvergence : Error {
    double last_residual;
    NoConvergence(const std::string& msg, double residual)
        : Error(msg), last_residual(residual) {}
};

/// Invalid run configuration (bad lambda, step sizes, radii, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Invalid generator or estimator parameters.
struct ParamError : Error {
    using Error::Error;
};

/// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

/// An enumeration exceeded its configured budget.
struct BudgetExceeded : Error {
    long enumerated;
    BudgetExceeded(const std::string& msg, long count)
        : Error(msg), enumerated(count) {}
};

} // namespace rcmdp
