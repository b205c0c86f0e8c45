#pragma once

#include <stdexcept>
#include <string>

namespace bgs {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inversion pivot fell below threshold, or the inverse failed residual
// certification: the operator is not usable as an intertwiner at this
// truncation.
struct SingularMatrixError : Error {
    explicit SingularMatrixError(const std::string& msg) : Error(msg) {}
};

// An exponential left the double range (beta * lambda too large for this
// truncation / precision).
struct OverflowError : Error {
    explicit OverflowError(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

// A scenario recipe violates its own preconditions (non-unit projector
// vector, epsilon outside (0,1), vanishing diagonal weight, ...).
struct RecipeError : Error {
    explicit RecipeError(const std::string& msg) : Error(msg) {}
};

// A primed functional was requested with a normalization that vanishes
// below threshold (in particular A = 0).
struct ZeroNormalizationError : Error {
    explicit ZeroNormalizationError(const std::string& msg) : Error(msg) {}
};

// Configuration file / flag validation failure; message names the field.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// An operation that only makes sense for one scenario kind was invoked on
// another (e.g. the projector closed form on a diagonal system).
struct WrongScenarioError : Error {
    explicit WrongScenarioError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace bgs
