#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disperse {

/// Base class for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad grid, non-positive coefficient, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Syntax error in a profile expression; offset is a 0-based byte position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation of a profile failed (division by zero, log of non-positive, ...).
class EvalError : public Error {
 public:
  EvalError(const std::string& what, double x)
      : Error(what + " at x=" + std::to_string(x)), x_(x) {}

  double x() const noexcept { return x_; }

 private:
  double x_;
};

/// The time step violates the reaction bound or produced a negative density.
class TimestepError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure ran out of budget before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A direct linear solve hit a zero pivot.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

}  // namespace disperse
