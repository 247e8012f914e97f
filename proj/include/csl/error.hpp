#pragma once

#include <stdexcept>
#include <string>

namespace csl {

enum class ErrorCode {
  InvalidArgument,
  KernelUnresolvable,
  GridMismatch,
  StepTooLarge,
  NonFinite,
  ScheduleMismatch,
  InsufficientData,
  Undecidable,
  UnboundVariable,
  NonHermitian,
  EmptyRecordSet,
  PositivityViolation,
  ConfigError,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::KernelUnresolvable: return "KernelUnresolvable";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::Undecidable: return "Undecidable";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace csl
