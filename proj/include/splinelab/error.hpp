#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splinelab {

/// Failure categories raised by the library. Every throw site uses one of
/// these so callers (and the CLI) can branch on the category instead of
/// parsing messages.
enum class ErrorCode {
  NotSorted,
  BadBoundary,
  MultiplicityTooHigh,
  IndexOutOfRange,
  InfeasibleSize,
  OutOfDomain,
  DimensionMismatch,
  NotPositiveDefinite,
  SizeCapExceeded,
  DegenerateFit,
  DivisionByZeroRegion,
  PreconditionViolated,
  DegenerateAlpha,
  MeshBlowup,
  HypothesisNotMet,
  NotSubset,
  UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace splinelab
