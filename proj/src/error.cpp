#include "abdiv/error.hpp"

namespace abdiv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kNonChordalInput: return "NonChordalInput";
    case ErrorKind::kCyclicInput: return "CyclicInput";
    case ErrorKind::kTableTooLarge: return "TableTooLarge";
    case ErrorKind::kDomainTooLarge: return "DomainTooLarge";
    case ErrorKind::kDivisionByZero: return "DivisionByZero";
    case ErrorKind::kNegativePowerOfZero: return "NegativePowerOfZero";
    case ErrorKind::kNegativeInput: return "NegativeInput";
    case ErrorKind::kLogOfZero: return "LogOfZero";
    case ErrorKind::kLogOfZeroOnSupport: return "LogOfZeroOnSupport";
    case ErrorKind::kZeroProbabilitySample: return "ZeroProbabilitySample";
    case ErrorKind::kOutOfDomainValue: return "OutOfDomainValue";
    case ErrorKind::kInconsistentModel: return "InconsistentModel";
    case ErrorKind::kEmptyData: return "EmptyData";
    case ErrorKind::kNoSuchEdge: return "NoSuchEdge";
    case ErrorKind::kScopeNotContained: return "ScopeNotContained";
    case ErrorKind::kVariableMismatch: return "VariableMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

bool is_support_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kNegativePowerOfZero:
    case ErrorKind::kLogOfZero:
    case ErrorKind::kLogOfZeroOnSupport:
    case ErrorKind::kZeroProbabilitySample:
      return true;
    default:
      return false;
  }
}

}  // namespace abdiv
