#include "mvgad/error.hpp"

namespace mvgad {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::DegeneratePartition: return "DegeneratePartition";
    case ErrorCode::ZeroVolume: return "ZeroVolume";
    case ErrorCode::SampleCountMismatch: return "SampleCountMismatch";
    case ErrorCode::FewerThanTwoViews: return "FewerThanTwoViews";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::UnknownPoint: return "UnknownPoint";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::MalformedCurve: return "MalformedCurve";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mvgad
