#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace setfit {

enum class ErrorCode {
  // corpus
  FileNotFound,
  MalformedRecord,
  EmptyDataset,
  LabelOutOfRange,
  InsufficientClassSize,
  InvalidArgument,
  // pair sampling
  DegenerateClass,
  NeedTwoClasses,
  // encoder
  EmptyInput,
  ZeroNorm,
  // head
  SingleClass,
  DimensionMismatch,
  InvalidDistribution,
  // persistence
  BadFormat,
  UnsupportedVersion,
  Truncated,
  ChecksumMismatch,
  // distillation
  TooFewTexts,
  // cost model
  InvalidSpec,
  // metrics
  LengthMismatch,
  Empty,
  NonBinary,
  NoPositives,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::InsufficientClassSize: return "InsufficientClassSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::NeedTwoClasses: return "NeedTwoClasses";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::TooFewTexts: return "TooFewTexts";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::NonBinary: return "NonBinary";
    case ErrorCode::NoPositives: return "NoPositives";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code, so
/// callers can branch on the kind and still print a readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Re-raise with a prefix naming the stage that failed, keeping the code.
  [[noreturn]] void rethrow_with_context(std::string_view context) const {
    throw Error(code_, std::string(context) + ": " + detail());
  }

  std::string detail() const {
    std::string_view w = what();
    const auto prefix = to_string(code_).size() + 2;
    return std::string(w.size() >= prefix ? w.substr(prefix) : w);
  }

 private:
  ErrorCode code_;
};

}  // namespace setfit
