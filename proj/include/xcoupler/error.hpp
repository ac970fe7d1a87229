#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xcoupler {

// Base for every data/model error raised by the toolkit. The CLI maps these
// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by a caller-supplied value.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A = lambda*W - jR + M could not be inverted at some frequency.
class SingularNetworkError : public Error {
 public:
  SingularNetworkError(const std::string& what, double freq_hz)
      : Error(what), freq_hz_(freq_hz) {}
  double freq_hz() const noexcept { return freq_hz_; }

 private:
  double freq_hz_;
};

// An iterative procedure ended above its residual threshold.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Malformed text input. line() is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace xcoupler
