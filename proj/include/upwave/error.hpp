#pragma once

#include <stdexcept>
#include <string>

namespace upwave {

enum class ErrorCode {
  UnsupportedOrder,
  GridTooSmall,
  DimensionMismatch,
  BadDims,
  SurfaceBelowDepth,
  NegativeJacobian,
  DegenerateNormal,
  DegenerateMetrics,
  NonFiniteState,
  NonpositiveImpedance,
  InvalidGamma,
  SpecMismatch,
  SourceOutsideDomain,
  MissingKey,
  BadValue,
  InconsistentDims,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::SurfaceBelowDepth: return "SurfaceBelowDepth";
    case ErrorCode::NegativeJacobian: return "NegativeJacobian";
    case ErrorCode::DegenerateNormal: return "DegenerateNormal";
    case ErrorCode::DegenerateMetrics: return "DegenerateMetrics";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NonpositiveImpedance: return "NonpositiveImpedance";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::SourceOutsideDomain: return "SourceOutsideDomain";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::InconsistentDims: return "InconsistentDims";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace upwave
