#include "lou/errors.hpp"

namespace lou {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kStationarityViolation: return "StationarityViolation";
    case ErrorCode::kDegenerateGamma: return "DegenerateGamma";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kSingularDenominator: return "SingularDenominator";
    case ErrorCode::kContourSingularity: return "ContourSingularity";
    case ErrorCode::kStripViolation: return "StripViolation";
    case ErrorCode::kNonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::kEmptyContourRegion: return "EmptyContourRegion";
    case ErrorCode::kQuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kInsufficientQuotes: return "InsufficientQuotes";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kAllStartsFailed: return "AllStartsFailed";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kEmptyBlock: return "EmptyBlock";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoConvergence:
    case ErrorCode::kNonConvergence:
    case ErrorCode::kAllStartsFailed:
      return ErrorClass::kConvergence;
    case ErrorCode::kSingularDenominator:
    case ErrorCode::kContourSingularity:
    case ErrorCode::kStripViolation:
    case ErrorCode::kNonPositiveVariance:
    case ErrorCode::kEmptyContourRegion:
    case ErrorCode::kQuadratureNonConvergence:
      return ErrorClass::kNumerical;
    default:
      return ErrorClass::kInput;
  }
}

}  // namespace lou
