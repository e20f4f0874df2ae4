#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace metalms {

// Malformed arguments, dimension mismatches, bad configuration.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A modelling assumption broke during a run (feature bound, ball membership,
// non-finite state). Carries the offending time step when there is one.
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what, std::optional<long> step = std::nullopt);
  std::optional<long> step() const { return step_; }

 private:
  std::optional<long> step_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metalms
