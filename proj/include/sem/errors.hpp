#pragma once

#include <stdexcept>
#include <string>

namespace sem {

// Error taxonomy mirrored by the CLI exit codes:
//   0 success, 1 check failure, 2 configuration error, 3 numerical error.
// Messages name the module and operation that raised them.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, long long step = -1,
                          long long path = -1)
      : std::runtime_error(what), step_(step), path_(path) {}
  long long step() const noexcept { return step_; }
  long long path() const noexcept { return path_; }

 private:
  long long step_;
  long long path_;
};

// Result exceeds double range (factorial/exponential blow-ups).
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sem
