#pragma once

#include <stdexcept>
#include <string>

namespace fcurve {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A structural requirement of an operator, kernel or model is violated. CLI exit code 3.
class SpecViolation : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: divergence, ill-conditioning, indefinite covariance. CLI exit code 4.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fcurve
