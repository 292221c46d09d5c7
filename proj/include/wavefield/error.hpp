#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wavefield {

enum class ErrorCode {
  DimMismatch,
  ZeroEnergy,
  InvalidVector,
  InvalidArgument,
  EmptyInput,
  DanglingNegator,
  UnknownLexeme,
  EmptyMemory,
  EmptyStore,
  DuplicateId,
  DuplicateLabel,
  StoreIO,
  CorruptStore,
  MalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// True for errors caused by bad input data or storage state rather than
// programmer misuse. The CLI maps these to exit code 2.
inline bool is_data_error(ErrorCode code) noexcept {
  return code != ErrorCode::InvalidArgument;
}

}  // namespace wavefield
