#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magzoll {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  PoleEvaluation,
  UnboundedDomain,
  PoleEscape,
  StepUnderflow,
  DegenerateSegments,
  NonContractible,
  Inconclusive,
  WindowOverlap,
  NotRotationallySymmetric,
  ContinuationLost,
  NonPositiveInput,
  TorusEulerZero,
  NonNegativeEuler,
  ZeroMeanField,
  NonpositiveMagneticCurvature,
  DenominatorNonpositive,
  CrossingNotFound,
};

std::string_view to_string(ErrorCode code);

/// Every failure carries a code and the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view module, const std::string& what)
      : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + what),
        code_(code),
        module_(module) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace magzoll
