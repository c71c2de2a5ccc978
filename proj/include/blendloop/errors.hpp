#pragma once

#include <stdexcept>
#include <string>

namespace blendloop {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a type invariant or precondition.
struct InvalidInput : Error {
    using Error::Error;
};

// Not enough observations for the requested statistic.
struct InsufficientData : Error {
    using Error::Error;
};

// The data is well formed but the statistic is undefined on it
// (zero variance, singular regression).
struct DegenerateData : Error {
    using Error::Error;
};

// The deterministic closed loop has no finite fixed point.
struct NoFixedPoint : Error {
    using Error::Error;
};

// Evaluation of a rational function at one of its poles.
struct DivisionByZero : Error {
    using Error::Error;
};

} // namespace blendloop
