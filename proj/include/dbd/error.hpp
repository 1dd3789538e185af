#pragma once

#include <stdexcept>
#include <string>

namespace dbd {

/// Failure categories surfaced by the library. The C API maps these onto
/// status codes one-to-one.
enum class ErrorCode {
  InvalidArgument,
  MissingSiContext,
  BasisTooSmall,
  QuadratureResolutionTooCoarse,
  ToleranceNotMet,
  NormDrift,
  GridTooCoarse,
  InconsistentBasis,
  InvalidPopulation,
  BudgetExhausted,
  IncompatibleTier,
  UnknownFigure,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// True for failures that stem from numerical tolerances rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dbd
