#include "advgraph/error.hpp"

namespace advgraph {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kConstraintViolation: return "ConstraintViolation";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kUnknownProcessor: return "UnknownProcessor";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyEdgeSet: return "EmptyEdgeSet";
    case ErrorCode::kFeatureMapMismatch: return "FeatureMapMismatch";
    case ErrorCode::kDivergence: return "DivergenceDetected";
    case ErrorCode::kExternalProtocol: return "ExternalProtocolError";
    case ErrorCode::kEncoding: return "EncodingError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kUnknownTransformerType: return "UnknownTransformerType";
    case ErrorCode::kInvalidPairing: return "InvalidPairing";
    case ErrorCode::kUnresolvedHook: return "UnresolvedHook";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace advgraph
