#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vista {

enum class ErrorKind {
  kInvalidArgument,
  kMissingCameraEntry,
  kDimensionMismatch,
  kUnreadableImage,
  kUnsupportedCameraModel,
  kParseError,
  kEmptyPointSet,
  kVersionMismatch,
  kCorruptHeader,
  kNonFiniteGradient,
  kOutOfRange,
  kEmptyMask,
  kCountMismatch,
  kTooFewViews,
  kNetworkError,
  kProtocolError,
  kContractViolation,
  kBackendFailure,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class VistaError : public std::runtime_error {
 public:
  VistaError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw VistaError(kind, message);
}

}  // namespace vista
