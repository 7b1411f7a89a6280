#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rangevar {

enum class ErrorCode {
  MalformedRow,
  MissingColumn,
  NonFiniteValue,
  InvalidRange,
  NegativeIntensity,
  EmptyDataset,
  DegenerateTicks,
  TooFewValues,
  NoSurvivingTicks,
  NonPositiveRange,
  NonPositiveIntensity,
  TooFewPoints,
  RankDeficient,
  DomainViolation,
  EmptyStats,
  EmptyGrid,
  KindMismatch,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Domain error raised by every module. The code identifies the failure
/// class; the message carries the context (row number, tick id, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rangevar
