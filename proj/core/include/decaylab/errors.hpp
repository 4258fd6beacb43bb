#pragma once

#include <stdexcept>
#include <string>

namespace decaylab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The feedback law does not belong to the class an operation requires
/// (for instance a law close to linear growth where Lambda_H -> 1).
class ClassificationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver (root finder, quadrature, ODE stepper) gave up.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace decaylab
