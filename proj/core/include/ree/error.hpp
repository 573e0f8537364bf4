#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ree {

enum class ErrorCode {
  DimensionMismatch,
  OverlappingGroups,
  UncoveredIndex,
  EmptyGroup,
  InvalidAlpha,
  InvalidRatio,
  InvalidWeight,
  InvalidLambda,
  InvalidRadius,
  InvalidBox,
  NonFiniteInput,
  InvalidResponse,
  NegativeScale,
  InvalidA,
  UnsupportedPenalty,
  NonFiniteOutput,
  JacobianUnavailable,
  StepOutOfRange,
  DegenerateInit,
  InvalidRho,
  InvalidConfig,
  InstanceTooLarge,
  MissingTraceFields,
  SingularSystem,
  InvalidPath,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Typed failure raised by validation and by solver preconditions.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ree
