#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bregman {

enum class ErrorKind {
  InvalidOperator,
  DimensionError,
  InvalidExponent,
  NotSingleValued,
  NotASubgradient,
  OutOfDomain,
  Unsupported,
  InvalidAlpha,
  InvalidNoise,
  InadmissibleNu,
  NonPositiveError,
  InvalidConfig,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidOperator: return "InvalidOperator";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::NotSingleValued: return "NotSingleValued";
    case ErrorKind::NotASubgradient: return "NotASubgradient";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::InvalidNoise: return "InvalidNoise";
    case ErrorKind::InadmissibleNu: return "InadmissibleNu";
    case ErrorKind::NonPositiveError: return "NonPositiveError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bregman
