#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riesz {

enum class ErrorCode {
  InvalidArgument,
  SingularOperator,
  NoConvergence,
  NotHermitian,
  NotPositiveDefinite,
  RankDeficient,
  EndpointViolation,
  FactorizationMismatch,
  DegenerateDenominator,
  BudgetExceeded,
  UnsupportedKind,
  ImplicationFailed,
  UnknownScenario,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as a LabError.
/// Verdict-style outcomes (violated hypotheses, near-defective bases,
/// inconclusive inclusions) are report fields instead, never exceptions.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EndpointViolation: return "EndpointViolation";
    case ErrorCode::FactorizationMismatch: return "FactorizationMismatch";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::ImplicationFailed: return "ImplicationFailed";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace riesz
