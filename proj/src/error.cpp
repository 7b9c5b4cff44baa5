#include "splinelab/error.hpp"

namespace splinelab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSorted: return "NotSorted";
    case ErrorCode::BadBoundary: return "BadBoundary";
    case ErrorCode::MultiplicityTooHigh: return "MultiplicityTooHigh";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InfeasibleSize: return "InfeasibleSize";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::DivisionByZeroRegion: return "DivisionByZeroRegion";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::DegenerateAlpha: return "DegenerateAlpha";
    case ErrorCode::MeshBlowup: return "MeshBlowup";
    case ErrorCode::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorCode::NotSubset: return "NotSubset";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace splinelab
