#pragma once

#include <stdexcept>
#include <string>

namespace urlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input has the wrong shape (matrix size, vector length, index range).
struct ShapeError : Error {
    using Error::Error;
};

/// rational_in_interval called with lo >= hi.
struct EmptyIntervalError : Error {
    using Error::Error;
};

/// A stated precondition does not hold for the given inputs.
struct PreconditionError : Error {
    using Error::Error;
};

/// Shared parts of an amalgamation disagree (distance, retraction or potential).
struct OverlapMismatchError : Error {
    using Error::Error;
};

/// An ExtensionSpec is invalid or stale for the triple it is applied to.
struct SpecError : Error {
    using Error::Error;
};

/// max_metric_regularize failed to reach a fixed point within its round budget.
struct RegularizeError : Error {
    using Error::Error;
};

/// A resource ceiling (points, denominator, wall clock) was hit; carries partial progress info.
struct BudgetExceededError : Error {
    explicit BudgetExceededError(const std::string& what, std::string partial = {})
        : Error(what), partial_progress(std::move(partial)) {}
    std::string partial_progress;
};

/// JSON input failed to parse or violates a schema.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace urlab
