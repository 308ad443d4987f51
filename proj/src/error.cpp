#include "cpa/error.hpp"

namespace cpa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNodes: return "DuplicateNodes";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateLeading: return "DegenerateLeading";
    case ErrorCode::ZeroDivisor: return "ZeroDivisor";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NoConstraints: return "NoConstraints";
    case ErrorCode::InfeasibleCgeK: return "InfeasibleCgeK";
    case ErrorCode::InfeasibleTrivialKernel: return "InfeasibleTrivialKernel";
    case ErrorCode::GenericityExhausted: return "GenericityExhausted";
    case ErrorCode::NotInKernel: return "NotInKernel";
    case ErrorCode::DisjointnessViolated: return "DisjointnessViolated";
    case ErrorCode::RepeatedRoots: return "RepeatedRoots";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingResponses: return "MissingResponses";
    case ErrorCode::SchemeNotValidated: return "SchemeNotValidated";
    case ErrorCode::InsufficientResponses: return "InsufficientResponses";
    case ErrorCode::NonScalarData: return "NonScalarData";
    case ErrorCode::WorkerLoss: return "WorkerLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace cpa
