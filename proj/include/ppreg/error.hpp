#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppreg {

enum class ErrorCode {
  InvalidArgument,
  EmptyErosion,
  OutOfWindow,
  OutOfExtent,
  MissingPattern,
  Singular,
  Diverged,
  NonFinite,
  NoPenalizedCoefficients,
  ZeroPilotCoefficient,
  SingularActiveHessian,
  ZeroTau,
  NoConvergedPoint,
  UnboundedTrend,
  UnstableModel,
  Io,
  Format,
};

// Stable machine-readable token, e.g. "E_EMPTY_EROSION".
std::string_view error_token(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // I/O and input-format problems map to a different CLI exit status.
  bool is_io() const noexcept {
    return code_ == ErrorCode::Io || code_ == ErrorCode::Format;
  }

 private:
  ErrorCode code_;
};

}  // namespace ppreg
