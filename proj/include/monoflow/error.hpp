#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace monoflow {

enum class ErrorCode {
  DimensionMismatch,
  NonSolidCone,
  NotPointed,
  InvalidCone,
  ParseError,
  UnknownVariable,
  DomainError,
  BlowUp,
  StepFailure,
  UnsupportedCone,
  EigenFailure,
  SamplingFailure,
  DegenerateInterval,
  InvalidProblem,
  ToleranceAmbiguity,
  IterationCap,
  NotEquilibrium,
  NotPeriodic,
  VNotInterior,
  AlphaUnbounded,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSolidCone: return "NonSolidCone";
    case ErrorCode::NotPointed: return "NotPointed";
    case ErrorCode::InvalidCone: return "InvalidCone";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::UnsupportedCone: return "UnsupportedCone";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::SamplingFailure: return "SamplingFailure";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::ToleranceAmbiguity: return "ToleranceAmbiguity";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::NotEquilibrium: return "NotEquilibrium";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::VNotInterior: return "VNotInterior";
    case ErrorCode::AlphaUnbounded: return "AlphaUnbounded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for every domain failure in the library.
///
/// `value` carries the one numeric payload some errors have: the flow time
/// reached for BlowUp/AlphaUnbounded, the character offset for ParseError,
/// the offending component for DomainError raised by field evaluation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> value = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message),
        value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<double> value_;
};

}  // namespace monoflow
