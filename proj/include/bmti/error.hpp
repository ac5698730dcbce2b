// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bmti {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The input sample violates an assumption (non-finite values, coincident points).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An operation was called before the state it needs exists.
class StateError : public Error {
 public:
  using Error::Error;
};

/// The request exceeds what the implementation supports (e.g. dense inversion at large N).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

}  // namespace bmti
