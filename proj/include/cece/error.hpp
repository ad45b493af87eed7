#pragma once

#include <stdexcept>
#include <string>

namespace cece {

// Base for errors that carry a short machine-readable rule tag
// ("positivity", "arm-range", "c-before-y", ...) next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string rule, const std::string& message, std::string location = {})
      : std::runtime_error(location.empty() ? message : location + ": " + message),
        rule_(std::move(rule)),
        location_(std::move(location)) {}

  const std::string& rule() const noexcept { return rule_; }
  const std::string& location() const noexcept { return location_; }

 private:
  std::string rule_;
  std::string location_;
};

// Malformed or invalid input data or configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

// Data is well formed but an estimand's precondition does not hold
// (positivity, zero denominator, infeasible sensitivity parameter).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cece
