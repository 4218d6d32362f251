#pragma once

#include <stdexcept>
#include <string>

namespace kktx {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A scenario or configuration value is missing, malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Split-step self-check failed (halving the step moved the answer too much).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double relative_change)
      : Error(what), relative_change_(relative_change) {}
  double relative_change() const { return relative_change_; }

 private:
  double relative_change_;
};

/// A spectral operation would have folded out-of-band energy back in-band.
class AliasingError : public Error {
 public:
  AliasingError(const std::string& what, double aliased_fraction)
      : Error(what), aliased_fraction_(aliased_fraction) {}
  double aliased_fraction() const { return aliased_fraction_; }

 private:
  double aliased_fraction_;
};

}  // namespace kktx
