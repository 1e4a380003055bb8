#pragma once

#include <stdexcept>
#include <string>

namespace ecofair {

enum class ErrorCode {
    // taxonomy / distribution validation
    OverlapError,
    CoverageError,
    EmptyMalignant,
    NegativeProbability,
    NormalizationError,
    LengthMismatch,
    // ingest
    SchemaError,
    RowCountMismatch,
    UnknownLabel,
    DuplicateSampleId,
    TooFewSamples,
    InvalidSpec,
    // risk calibration
    NoAgeData,
    NoMalignantCases,
    // fusion
    DegenerateTrainingSet,
    DimensionMismatch,
    // energy
    EmptyDecisions,
    ZeroHeavyEnergy,
    // metrics
    OutOfRangeLabel,
    NoMalignantSamples,
    NoEvaluableSubgroup,
    SubgroupMismatch,
    EmptyInput,
    // shared
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ecofair

#define ECOFAIR_REQUIRE(cond, code, msg)                                                           \
    do {                                                                                           \
        if (!(cond)) ::ecofair::raise((code), (msg));                                              \
    } while (0)
