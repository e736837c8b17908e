#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spongedim {

enum class ErrorKind {
  NonMonotone,
  TooSmall,
  LevelOutOfRange,
  InvalidDigit,
  InvalidSubshift,
  BudgetExceeded,
  NotCertified,
  NoConvergence,
  NotErgodic,
  InvalidMeasure,
  SupportViolation,
  QuadratureFailure,
  DomainTooLarge,
  WordTooShort,
  NotInLanguage,
  UnsupportedMeasure,
  SamplerFailure,
  ConfigError,
  InternalError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonMonotone: return "NonMonotone";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorKind::InvalidDigit: return "InvalidDigit";
    case ErrorKind::InvalidSubshift: return "InvalidSubshift";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotCertified: return "NotCertified";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotErgodic: return "NotErgodic";
    case ErrorKind::InvalidMeasure: return "InvalidMeasure";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::DomainTooLarge: return "DomainTooLarge";
    case ErrorKind::WordTooShort: return "WordTooShort";
    case ErrorKind::NotInLanguage: return "NotInLanguage";
    case ErrorKind::UnsupportedMeasure: return "UnsupportedMeasure";
    case ErrorKind::SamplerFailure: return "SamplerFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InternalError: return "InternalError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace spongedim
