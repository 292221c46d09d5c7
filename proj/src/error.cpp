#include "wavefield/error.hpp"

namespace wavefield {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroEnergy: return "ZeroEnergy";
    case ErrorCode::InvalidVector: return "InvalidVector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DanglingNegator: return "DanglingNegator";
    case ErrorCode::UnknownLexeme: return "UnknownLexeme";
    case ErrorCode::EmptyMemory: return "EmptyMemory";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::StoreIO: return "StoreIO";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace wavefield
