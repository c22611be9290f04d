#pragma once

#include <stdexcept>
#include <string>

namespace mpls {

// Base of every error raised by the library. Each subclass maps to one
// failure family so callers (the harness, the CLI) can pick a policy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not fit together, or parameters outside their domain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: rank deficiency, zero matrices, no leading direction.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Invalid configuration text, unknown keys, bad presets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpls
