#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sqgw {

enum class ErrorCode {
  OddResolution,
  ResolutionTooSmall,
  NonPositiveExtent,
  GridMismatch,
  NonFinite,
  SymmetryViolation,
  InvalidProfile,
  InvalidWaveParams,
  InvalidArgument,
  PreconditionViolation,
  NoNehariPoint,
  Stall,
  TrivialTheta,
  SupportTouchesBoundary,
  EmptyDecayWindow,
  PeakAtWindowEdge,
  BlowUp,
  BadMagic,
  DimensionOverflow,
  TruncatedPayload,
  Io,
  Config,
  Usage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal conditions (mean of a Riesz input, support near the box edge) are
// routed here. The default sink discards them.
using WarningSink = std::function<void(std::string_view)>;

}  // namespace sqgw
