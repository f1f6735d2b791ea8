#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bondkit {

enum class ErrorCode {
    // catalog
    MalformedRow,
    DuplicateBondId,
    UnknownRating,
    InvalidConfig,
    UnknownIssuer,
    UnknownBond,
    DropTooLarge,
    // embedding
    DimensionMismatch,
    ZeroNorm,
    DuplicateKey,
    ParseError,
    MissingEmbedding,
    TooFewCategories,
    MissingReference,
    InvalidHierarchy,
    // search
    InvalidWeights,
    MissingFeatureScore,
    EmptyCandidateSet,
    InvalidRules,
    InvalidShortlist,
    // curve
    NonPositiveMaturity,
    TooFewPoints,
    DegenerateDesign,
    LengthMismatch,
    EmptyInput,
    AllExcluded,
    // evaluation
    ZeroTotal,
    NoEligibleIssuers,
    // plumbing
    IoError,
    InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Toolkit-wide exception: every documented error condition throws one of
/// these with the matching code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// One bad input row, reported with its 1-based line number.
struct RowIssue {
    std::size_t line = 0;
    std::string field;
    std::string detail;
};

/// Thrown by catalog ingestion; collects every offending row so callers can
/// surface all diagnostics at once instead of failing on the first.
class CatalogLoadError : public Error {
public:
    CatalogLoadError(ErrorCode code, const std::string& message, std::vector<RowIssue> issues)
        : Error(code, message), issues_(std::move(issues)) {}

    const std::vector<RowIssue>& issues() const { return issues_; }

private:
    std::vector<RowIssue> issues_;
};

}  // namespace bondkit
