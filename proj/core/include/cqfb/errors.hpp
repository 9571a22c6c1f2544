#pragma once

#include <stdexcept>
#include <string>

namespace cqfb {

// Violated precondition of a numerical operation (bad dt, zero detuning, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Failure while parsing or validating an experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Non-finite values produced during integration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cqfb
