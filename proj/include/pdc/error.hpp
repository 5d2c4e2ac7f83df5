#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdc {

enum class ErrorCode {
  OutOfValidityRange,
  NoSignChange,
  DegenerateInput,
  EmptyOverlap,
  AlreadyWeighted,
  NonUniformGrid,
  AllZeroField,
  GridTooLarge,
  PeakNotResolved,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfValidityRange: return "OutOfValidityRange";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::AlreadyWeighted: return "AlreadyWeighted";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::AllZeroField: return "AllZeroField";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::PeakNotResolved: return "PeakNotResolved";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every physics-domain failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdc
