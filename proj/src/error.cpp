#include "ppreg/error.hpp"

namespace ppreg {

std::string_view error_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::EmptyErosion: return "E_EMPTY_EROSION";
    case ErrorCode::OutOfWindow: return "E_OUT_OF_WINDOW";
    case ErrorCode::OutOfExtent: return "E_OUT_OF_EXTENT";
    case ErrorCode::MissingPattern: return "E_MISSING_PATTERN";
    case ErrorCode::Singular: return "E_SINGULAR";
    case ErrorCode::Diverged: return "E_DIVERGED";
    case ErrorCode::NonFinite: return "E_NON_FINITE";
    case ErrorCode::NoPenalizedCoefficients: return "E_NO_PENALIZED_COEFFICIENTS";
    case ErrorCode::ZeroPilotCoefficient: return "E_ZERO_PILOT_COEFFICIENT";
    case ErrorCode::SingularActiveHessian: return "E_SINGULAR_ACTIVE_HESSIAN";
    case ErrorCode::ZeroTau: return "E_ZERO_TAU";
    case ErrorCode::NoConvergedPoint: return "E_NO_CONVERGED_POINT";
    case ErrorCode::UnboundedTrend: return "E_UNBOUNDED_TREND";
    case ErrorCode::UnstableModel: return "E_UNSTABLE_MODEL";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Format: return "E_FORMAT";
  }
  return "E_UNKNOWN";
}

}  // namespace ppreg
