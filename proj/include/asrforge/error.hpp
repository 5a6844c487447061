#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace asrforge {

// One error code per failure mode named in the module contracts. The CLI
// prints the code verbatim so scripts can match on it.
enum class ErrorCode {
  UnsupportedEncoding,
  MalformedContainer,
  EmptyAudio,
  IoFailure,
  BufferTooShort,
  MalformedFile,
  OutOfRangeProbability,
  EmptyCorpus,
  VocabTooSmall,
  InvalidIndex,
  DimensionMismatch,
  MissingTranscript,
  UnreadableAudio,
  InsufficientData,
  MissingHypothesis,
  LangProfileMismatch,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedEncoding:   return "UnsupportedEncoding";
    case ErrorCode::MalformedContainer:    return "MalformedContainer";
    case ErrorCode::EmptyAudio:            return "EmptyAudio";
    case ErrorCode::IoFailure:             return "IoFailure";
    case ErrorCode::BufferTooShort:        return "BufferTooShort";
    case ErrorCode::MalformedFile:         return "MalformedFile";
    case ErrorCode::OutOfRangeProbability: return "OutOfRangeProbability";
    case ErrorCode::EmptyCorpus:           return "EmptyCorpus";
    case ErrorCode::VocabTooSmall:         return "VocabTooSmall";
    case ErrorCode::InvalidIndex:          return "InvalidIndex";
    case ErrorCode::DimensionMismatch:     return "DimensionMismatch";
    case ErrorCode::MissingTranscript:     return "MissingTranscript";
    case ErrorCode::UnreadableAudio:       return "UnreadableAudio";
    case ErrorCode::InsufficientData:      return "InsufficientData";
    case ErrorCode::MissingHypothesis:     return "MissingHypothesis";
    case ErrorCode::LangProfileMismatch:   return "LangProfileMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace asrforge
