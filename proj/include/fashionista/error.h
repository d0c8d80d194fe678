#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fashionista {

enum class ErrorCode {
  kMalformedRecord,
  kDuplicateId,
  kInconsistentFeatureDim,
  kUnknownItem,
  kUnknownUser,
  kInvalidSpec,
  kEmptyInput,
  kDimensionMismatch,
  kEpochOutOfRange,
  kEmptyTrainingSet,
  kDivergedTraining,
  kEmptyHeldout,
  kTooFewPoints,
  kNonFiniteInput,
  kShapeMismatch,
  kInconsistentInputs,
  kNoCandidates,
  kInvalidViewport,
  kBadModelFile,
  kIoError,
  kBadConfig,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kInconsistentFeatureDim: return "InconsistentFeatureDim";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kDivergedTraining: return "DivergedTraining";
    case ErrorCode::kEmptyHeldout: return "EmptyHeldout";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInconsistentInputs: return "InconsistentInputs";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kInvalidViewport: return "InvalidViewport";
    case ErrorCode::kBadModelFile: return "BadModelFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the HTTP layer) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fashionista
