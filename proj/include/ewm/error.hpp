#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ewm {

enum class ErrorCode {
  NegativeWeight,
  SumNotOne,
  TooShort,
  LengthMismatch,
  OutsideNeighborhood,
  BadDelta,
  InvalidSpec,
  DimensionMismatch,
  ZeroRow,
  InvalidPair,
  BadWeights,
  InvalidPath,
  BadAlpha,
  AlreadyStopped,
  IndexOutOfRange,
  EmptyStream,
  TooLarge,
  BadParams,
  InfeasibleKernel,
  FormatError,
  UsageError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Tolerances shared by every module.
namespace tol {
inline constexpr double kSimplex = 1e-9;
inline constexpr double kReconstruct = 1e-10;
inline constexpr double kIdentity = 1e-12;
inline constexpr double kClamp = 1e-14;
}  // namespace tol

}  // namespace ewm
