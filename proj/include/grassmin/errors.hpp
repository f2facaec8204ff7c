#pragma once

#include <stdexcept>
#include <string>

namespace grassmin {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// A dense/oracle-scale operation was requested beyond its size budget.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// Orthonormalization hit a Gram pivot below the rank tolerance.
struct RankDeficient : Error {
    using Error::Error;
};

/// Factorization of a preconditioner base hit a non-positive pivot.
struct NotPositiveDefinite : Error {
    using Error::Error;
};

/// A frame failed the Stiefel constraint check.
struct NotOrthonormal : Error {
    using Error::Error;
};

/// A direction failed the tangency precondition.
struct NotTangent : Error {
    using Error::Error;
};

/// closest_representative: the frame is too far from the reference subspace.
struct TooFar : Error {
    using Error::Error;
};

/// An iterative oracle (Jacobi sweeps) did not reach its tolerance.
struct NoConvergence : Error {
    using Error::Error;
};

/// Line search could not produce a decrease.
struct NoDecrease : Error {
    using Error::Error;
};

/// A diagnostic was asked for more data than the record contains.
struct InsufficientData : Error {
    using Error::Error;
};

/// Config file could not be parsed / validated.
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace grassmin
