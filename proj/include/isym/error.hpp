#pragma once

#include <stdexcept>
#include <string>

namespace isym {

enum class ErrorCode {
    ParseError,
    NonManifold,
    Disconnected,
    DegenerateFace,
    InvalidSpec,
    LengthMismatch,
    NumericalDegeneracy,
    ConvergenceFailure,
    InsufficientRank,
    ZeroEigenvalueDivision,
    DegenerateSpectrum,
    EmptyRegion,
    RankDeficient,
    DimensionMismatch,
    TooFewMaps,
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorCode code);

// Input errors map to CLI exit code 2, numerical failures to 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace isym
