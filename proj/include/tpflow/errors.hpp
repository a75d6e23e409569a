#pragma once

#include <stdexcept>
#include <string>

namespace tpflow {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, shape mismatch, malformed files. CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular modes, divergence, non-convergence. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularModeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tpflow
