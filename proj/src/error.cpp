#include "invlr/error.hpp"

namespace invlr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotARepresentation: return "NotARepresentation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::EmptyNullSpace: return "EmptyNullSpace";
    case ErrorCode::NotCyclic: return "NotCyclic";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularData: return "SingularData";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::TooManySubsets: return "TooManySubsets";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonOneHotTargets: return "NonOneHotTargets";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::OrbitMeanZero: return "OrbitMeanZero";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace invlr
