#pragma once

#include <stdexcept>
#include <string>

namespace canard {

/// Base class for all failures raised by the laboratory.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config/usage problems (maps to exit code 2 in the CLI).
struct ConfigError : Error {
    using Error::Error;
};

/// Numerical failures (maps to exit code 3 in the CLI).
struct NumericalError : Error {
    using Error::Error;
};

struct NoFolds : NumericalError {
    using NumericalError::NumericalError;
};
struct TooManyFolds : NumericalError {
    using NumericalError::NumericalError;
};
struct BranchLost : NumericalError {
    using NumericalError::NumericalError;
};
struct StepLimitExceeded : NumericalError {
    using NumericalError::NumericalError;
};
struct NonFiniteState : NumericalError {
    using NumericalError::NumericalError;
};
struct NoBracket : NumericalError {
    using NumericalError::NumericalError;
};
struct SlopeOneNotFound : NumericalError {
    using NumericalError::NumericalError;
};
struct OutOfStrip : NumericalError {
    using NumericalError::NumericalError;
};
struct NoRoot : NumericalError {
    using NumericalError::NumericalError;
};
struct BracketInvalid : NumericalError {
    using NumericalError::NumericalError;
};
struct WindowBelowFloor : NumericalError {
    using NumericalError::NumericalError;
};
struct NeverExits : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace canard
