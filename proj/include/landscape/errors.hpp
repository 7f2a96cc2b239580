#pragma once

#include <stdexcept>
#include <string>

namespace landscape {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A kernel received a vector of norm zero (the objective is not
/// differentiable at configurations containing a zero neuron).
struct ZeroVector : Error {
  explicit ZeroVector(const std::string& what) : Error(what) {}
};

/// Two operands disagree on dimensions (e.g. student vs teacher ambient d).
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// A derivative was requested at a point where the objective is not
/// differentiable (some student neuron has norm zero, or an iterate's
/// neuron norm fell below the differentiability guard).
struct NonDifferentiablePoint : Error {
  explicit NonDifferentiablePoint(const std::string& what) : Error(what) {}
};

/// A neuron / row / block index is outside the valid range.
struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

/// A split fraction alpha lies outside its allowed interval.
struct AlphaOutOfRange : Error {
  explicit AlphaOutOfRange(const std::string& what) : Error(what) {}
};

/// A matrix handed to the symmetric eigensolver is not symmetric within
/// tolerance.
struct NotSymmetric : Error {
  explicit NotSymmetric(const std::string& what) : Error(what) {}
};

/// The requested Rayleigh-quotient level lies outside [lambda_min, lambda_max].
struct TargetOutOfRange : Error {
  explicit TargetOutOfRange(const std::string& what) : Error(what) {}
};

/// A global-minimum construction spec violates its invariants
/// (weights not summing to one, empty group, bad partition).
struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& what) : Error(what) {}
};

/// A probe received invalid parameters (non-positive alpha / epsilon, ...).
struct InvalidParams : Error {
  explicit InvalidParams(const std::string& what) : Error(what) {}
};

/// A certificate was requested at a point that is not a critical point
/// (or not a local minimum) within tolerance.
struct NotACriticalPoint : Error {
  explicit NotACriticalPoint(const std::string& what) : Error(what) {}
};

/// Bad or inconsistent experiment configuration.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace landscape
