#pragma once

#include <stdexcept>
#include <string>

namespace kpodnn {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  CflViolation,
  TooFewRows,
  DegenerateSpectrum,
  ConvergenceFailure,
  ZeroTargetNorm,
  Diverged,
  Format,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ZeroTargetNorm: return "ZeroTargetNorm";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Numerical failures (as opposed to bad input) map to CLI exit code 3.
inline bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CflViolation:
    case ErrorKind::DegenerateSpectrum:
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::ZeroTargetNorm:
    case ErrorKind::Diverged:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same error, message prefixed with the pipeline stage it surfaced in.
  Error annotated(const std::string& stage) const {
    Error e(*this);
    e.message_override_ = "[" + stage + "] " + std::runtime_error::what();
    return e;
  }

  const char* what() const noexcept override {
    return message_override_.empty() ? std::runtime_error::what() : message_override_.c_str();
  }

 private:
  ErrorKind kind_;
  std::string message_override_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace kpodnn
