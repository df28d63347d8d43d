#pragma once

#include <stdexcept>
#include <string>

namespace qmb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed something outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Eigen-solver, factorization or convergence failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed text or JSON input. Line and column are 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what
                       : what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace qmb
