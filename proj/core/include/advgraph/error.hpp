#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advgraph {

enum class ErrorCode {
  kTypeMismatch,
  kEmptyVocabulary,
  kConstraintViolation,
  kUnknownAction,
  kUnknownProcessor,
  kMalformedInput,
  kDuplicateName,
  kIndexOutOfRange,
  kInvalidDistribution,
  kLabelOutOfRange,
  kDimensionMismatch,
  kEmptyEdgeSet,
  kFeatureMapMismatch,
  kDivergence,
  kExternalProtocol,
  kEncoding,
  kParse,
  kUnknownTransformerType,
  kInvalidPairing,
  kUnresolvedHook,
  kSchemaMismatch,
  kInvalidArgument,
  kIo,
};

std::string_view ToString(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// failure class so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ToString(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace advgraph
