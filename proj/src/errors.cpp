#include "metalms/errors.hpp"

namespace metalms {

namespace {
std::string with_step(const std::string& what, std::optional<long> step) {
  if (!step) return what;
  return what + " (step " + std::to_string(*step) + ")";
}
}  // namespace

ContractViolation::ContractViolation(const std::string& what, std::optional<long> step)
    : std::runtime_error(with_step(what, step)), step_(step) {}

}  // namespace metalms
