#include "rangevar/errors.hpp"

namespace rangevar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::NegativeIntensity: return "NegativeIntensity";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateTicks: return "DegenerateTicks";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::NoSurvivingTicks: return "NoSurvivingTicks";
    case ErrorCode::NonPositiveRange: return "NonPositiveRange";
    case ErrorCode::NonPositiveIntensity: return "NonPositiveIntensity";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::EmptyStats: return "EmptyStats";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace rangevar
