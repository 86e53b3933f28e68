#pragma once

#include <stdexcept>
#include <string>

namespace ising {

// Base class for all library errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// System too large for exact enumeration.
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& msg) : Error(msg) {}
};

// A mathematical domain violation (log of a nonpositive number, arctanh
// outside (-1,1), infeasible pseudomarginal, undefined metric, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Iterative solve did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double residual, int iterations)
      : Error(msg), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

// Singular or unusable matrix.
class LinAlgError : public Error {
 public:
  explicit LinAlgError(const std::string& msg) : Error(msg) {}
};

// Malformed input file; carries a 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line = -1) : Error(msg), line(line) {}
  long line;
};

// Invalid configuration or argument combination.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace ising
