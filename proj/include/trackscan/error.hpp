#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trackscan {

enum class ErrorCode {
  InvalidArgument,
  NoPlatformSignal,
  DegenerateFit,
  ZeroSpan,
  InsufficientTrials,
  LengthMismatch,
  NoPreviousLayer,
  TargetReached,
  LayerBudgetExhausted,
  Io,
  Format,
  Config,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoPlatformSignal: return "NoPlatformSignal";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ZeroSpan: return "ZeroSpan";
    case ErrorCode::InsufficientTrials: return "InsufficientTrials";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoPreviousLayer: return "NoPreviousLayer";
    case ErrorCode::TargetReached: return "TargetReached";
    case ErrorCode::LayerBudgetExhausted: return "LayerBudgetExhausted";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trackscan
