#ifndef VOCALSCREEN_ERROR_HPP_
#define VOCALSCREEN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vocalscreen {

enum class ErrorCode {
  kInvalidArgument,
  // audio_io
  kUnsupportedCodec,
  kCorruptHeader,
  kEmptyAudio,
  kClipTooShort,
  kIoReadFailure,
  kIoWriteFailure,
  // dsp
  kDegenerateFilterbank,
  // features
  kEmptySeries,
  kDimensionMismatch,
  kDuplicateId,
  kParseError,
  kNameCollision,
  kMissingEmbedding,
  // classifiers
  kSingleClass,
  kNonfiniteInput,
  kSchemaMismatch,
  kUnknownParameter,
  // evaluation
  kDuplicateRecording,
  kConflictingMetadata,
  kMissingFile,
  kBadLabel,
  kTooFewSubjects,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vocalscreen

#endif  // VOCALSCREEN_ERROR_HPP_
