#pragma once

#include <stdexcept>
#include <string>

namespace abdiv {

enum class ErrorKind {
  kInvalidArgument,
  kParseError,
  kNonChordalInput,
  kCyclicInput,
  kTableTooLarge,
  kDomainTooLarge,
  kDivisionByZero,
  kNegativePowerOfZero,
  kNegativeInput,
  kLogOfZero,
  kLogOfZeroOnSupport,
  kZeroProbabilitySample,
  kOutOfDomainValue,
  kInconsistentModel,
  kEmptyData,
  kNoSuchEdge,
  kScopeNotContained,
  kVariableMismatch,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// True for failures meaning "the divergence is infinite or undefined for
/// these supports" rather than malformed input.
bool is_support_error(ErrorKind kind) noexcept;

}  // namespace abdiv
