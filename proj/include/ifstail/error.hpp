#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifstail {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonConvergence,
  KnotOverflow,
  SingularSystem,
  ZeroLipschitz,
  UncertifiableTail,
  NonContracting,
  Overflow,
  WorkBudgetExceeded,
  EmptySampleSet,
  InsufficientTailData,
  InsufficientLdpData,
  NoExpandingAtom,
  UnknownPreset,
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::KnotOverflow: return "KnotOverflow";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroLipschitz: return "ZeroLipschitz";
    case ErrorCode::UncertifiableTail: return "UncertifiableTail";
    case ErrorCode::NonContracting: return "NonContracting";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::WorkBudgetExceeded: return "WorkBudgetExceeded";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::InsufficientTailData: return "InsufficientTailData";
    case ErrorCode::InsufficientLdpData: return "InsufficientLdpData";
    case ErrorCode::NoExpandingAtom: return "NoExpandingAtom";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// All library failures surface as this type; `code()` distinguishes them and
// `what()` renders as a single "<Code>: <detail>" line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &detail) {
  throw Error(code, detail);
}

inline void require(bool condition, ErrorCode code, const std::string &detail) {
  if (!condition) {
    fail(code, detail);
  }
}

}  // namespace ifstail
