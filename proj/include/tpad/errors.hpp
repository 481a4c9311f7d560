#pragma once

#include <stdexcept>
#include <string>

namespace tpad {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix/vector dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid argument value (out-of-range p, negative std, k > n, ...).
struct ParamError : Error {
    using Error::Error;
};

// Malformed input file (CSV cell, JSON field, version mismatch).
struct FormatError : Error {
    using Error::Error;
};

// Inconsistent configuration between components (model vs data, phase 1 vs 2).
struct ConfigError : Error {
    using Error::Error;
};

// Too few observations for the requested statistic.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Iterative numeric routine failed to converge.
struct ConvergenceError : Error {
    using Error::Error;
};

// Optimization diverged (NaN loss) or could not run.
struct TrainingError : Error {
    using Error::Error;
};

// Evaluation impossible (single-class labels, missing scores).
struct EvalError : Error {
    using Error::Error;
};

// Intrinsic-dimension estimation impossible on the given sweep.
struct EstimationError : Error {
    using Error::Error;
};

// API misuse that a correct caller never triggers (stale caches etc.).
struct ContractError : Error {
    using Error::Error;
};

} // namespace tpad
