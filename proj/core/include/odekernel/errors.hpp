#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odekernel {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or a non-square matrix where one is required.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf inputs, empty data sets, malformed arguments.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// An operation kind the tape does not support.
class UnsupportedOpError : public Error {
 public:
  using Error::Error;
};

/// A quadrature scheme was given points it cannot handle
/// (wrong count, non-uniform spacing for a uniform-grid scheme).
class SchemeError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration(iteration) {}
  std::size_t iteration;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File read/write failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace odekernel
