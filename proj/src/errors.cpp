#include "bondkit/errors.hpp"

namespace bondkit {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateBondId: return "DuplicateBondId";
        case ErrorCode::UnknownRating: return "UnknownRating";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::UnknownIssuer: return "UnknownIssuer";
        case ErrorCode::UnknownBond: return "UnknownBond";
        case ErrorCode::DropTooLarge: return "DropTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingEmbedding: return "MissingEmbedding";
        case ErrorCode::TooFewCategories: return "TooFewCategories";
        case ErrorCode::MissingReference: return "MissingReference";
        case ErrorCode::InvalidHierarchy: return "InvalidHierarchy";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::MissingFeatureScore: return "MissingFeatureScore";
        case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
        case ErrorCode::InvalidRules: return "InvalidRules";
        case ErrorCode::InvalidShortlist: return "InvalidShortlist";
        case ErrorCode::NonPositiveMaturity: return "NonPositiveMaturity";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::DegenerateDesign: return "DegenerateDesign";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::AllExcluded: return "AllExcluded";
        case ErrorCode::ZeroTotal: return "ZeroTotal";
        case ErrorCode::NoEligibleIssuers: return "NoEligibleIssuers";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

}  // namespace bondkit
