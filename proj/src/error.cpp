#include "isym/error.hpp"

namespace isym {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NonManifold: return "NonManifold";
        case ErrorCode::Disconnected: return "Disconnected";
        case ErrorCode::DegenerateFace: return "DegenerateFace";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NumericalDegeneracy: return "NumericalDegeneracy";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::InsufficientRank: return "InsufficientRank";
        case ErrorCode::ZeroEigenvalueDivision: return "ZeroEigenvalueDivision";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewMaps: return "TooFewMaps";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_numerical(ErrorCode code) {
    switch (code) {
        case ErrorCode::NumericalDegeneracy:
        case ErrorCode::ConvergenceFailure:
        case ErrorCode::InsufficientRank:
        case ErrorCode::ZeroEigenvalueDivision:
        case ErrorCode::DegenerateSpectrum:
        case ErrorCode::RankDeficient:
            return true;
        default:
            return false;
    }
}

}  // namespace isym
