#include "dbd/error.hpp"

namespace dbd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingSiContext: return "MissingSiContext";
    case ErrorCode::BasisTooSmall: return "BasisTooSmall";
    case ErrorCode::QuadratureResolutionTooCoarse: return "QuadratureResolutionTooCoarse";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::NormDrift: return "NormDrift";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::InconsistentBasis: return "InconsistentBasis";
    case ErrorCode::InvalidPopulation: return "InvalidPopulation";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::IncompatibleTier: return "IncompatibleTier";
    case ErrorCode::UnknownFigure: return "UnknownFigure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::QuadratureResolutionTooCoarse:
    case ErrorCode::ToleranceNotMet:
    case ErrorCode::NormDrift:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::BudgetExhausted:
      return true;
    default:
      return false;
  }
}

}  // namespace dbd
