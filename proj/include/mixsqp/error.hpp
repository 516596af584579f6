#pragma once

#include <stdexcept>
#include <string>

namespace mixsqp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or type invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A guarded logarithm received a non-positive argument. Line searches catch
// this and backtrack.
class InfeasibleEvaluation : public Error {
 public:
  using Error::Error;
};

// Linear algebra broke down (e.g. a Cholesky factorization failed after
// regularization).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixsqp
