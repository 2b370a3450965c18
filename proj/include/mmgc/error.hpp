#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmgc {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, edge lists, config files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input with the wrong shape or a violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear system that has no unique solution.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Iterative method stopped at its cap. Carries the best estimate reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace mmgc
