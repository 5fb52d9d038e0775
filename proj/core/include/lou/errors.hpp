#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lou {

enum class ErrorCode {
  kStationarityViolation,
  kDegenerateGamma,
  kInvalidParameter,
  kSingularDenominator,
  kContourSingularity,
  kStripViolation,
  kNonPositiveVariance,
  kEmptyContourRegion,
  kQuadratureNonConvergence,
  kOutOfBounds,
  kNoConvergence,
  kInsufficientQuotes,
  kNonConvergence,
  kAllStartsFailed,
  kParseError,
  kSchemaMismatch,
  kEmptyBlock,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorClass { kInput, kNumerical, kConvergence };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lou
