#include "chernoff/error.hpp"

namespace chernoff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::PointNotOnManifold: return "PointNotOnManifold";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidTimeOrder: return "InvalidTimeOrder";
    case ErrorCode::KernelUnderResolved: return "KernelUnderResolved";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::UnsupportedScaling: return "UnsupportedScaling";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::ShellTooThick: return "ShellTooThick";
    case ErrorCode::TimesNotInPartition: return "TimesNotInPartition";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace chernoff
