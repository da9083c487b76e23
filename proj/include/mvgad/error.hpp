#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvgad {

enum class ErrorCode {
  EmptyInput,
  DimensionMismatch,
  NotSymmetric,
  NoConvergence,
  IsolatedNode,
  KTooLarge,
  Disconnected,
  DegeneratePartition,
  ZeroVolume,
  SampleCountMismatch,
  FewerThanTwoViews,
  EmptyGraph,
  NonFiniteLoss,
  NonFiniteValue,
  InvalidGraph,
  SeriesTooShort,
  UnknownPoint,
  DuplicatePoint,
  InvalidConfig,
  LengthMismatch,
  DegenerateLabels,
  MalformedCurve,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this type. The optional
// stage tag names the pipeline stage that raised it ("fusion", "gnn", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const {
    return Error(code_, what(), std::move(stage));
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mvgad
