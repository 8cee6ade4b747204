#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqgbound {

enum class ErrorCode {
  kInvalidInput,
  kSingularCovariance,
  kInvalidCost,
  kNotStabilizable,
  kNotDetectable,
  kDegenerateInnovation,
  kUnstableClosedLoop,
  kInvalidDelta,
  kDivisionByZero,
  kInvalidDimensions,
  kNondegeneracyViolated,
  kInvalidTheta,
  kWrongMode,
  kInvalidPrior,
  kDegenerateClosedLoop,
  kNotOveractuated,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lqgbound
