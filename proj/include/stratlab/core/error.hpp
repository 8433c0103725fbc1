#pragma once

#include <stdexcept>
#include <string>

namespace stratlab {

/// Violated precondition on numerical input (non-finite values, bad grids,
/// unstable stratification, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time integration lost positivity, produced non-finite values or exceeded
/// its norm ceiling.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace stratlab
