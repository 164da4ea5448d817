#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invlr {

enum class ErrorCode {
  NonSquare,
  NotARepresentation,
  IndexOutOfRange,
  OrderMismatch,
  EmptyNullSpace,
  NotCyclic,
  NoConvergence,
  RankOutOfRange,
  NotSymmetric,
  NotPositiveDefinite,
  SingularData,
  ShapeMismatch,
  InvalidGrid,
  DegenerateSpectrum,
  TooManySubsets,
  InvalidConfig,
  NonOneHotTargets,
  DivergenceDetected,
  OrbitMeanZero,
  ZeroVector,
  DimensionMismatch,
  NotUnitary,
  SingularKernel,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace invlr
