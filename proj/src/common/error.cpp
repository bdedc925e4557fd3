#include "common/error.hpp"

namespace eclab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::UnparsableRow: return "UnparsableRow";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::YearNotFound: return "YearNotFound";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::RepeatedEigenvalue: return "RepeatedEigenvalue";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::ZeroUbiquity: return "ZeroUbiquity";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::WindowOverlap: return "WindowOverlap";
    case ErrorCode::YearMissing: return "YearMissing";
    case ErrorCode::EmptyAtRiskSet: return "EmptyAtRiskSet";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::PerfectSeparation: return "PerfectSeparation";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Validation:
    case ErrorCode::WindowOverlap:
        return ErrorClass::Validation;
    case ErrorCode::DegenerateMatrix:
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::NoConvergence:
    case ErrorCode::RepeatedEigenvalue:
    case ErrorCode::ConstantSeries:
    case ErrorCode::RankDeficient:
    case ErrorCode::PerfectSeparation:
        return ErrorClass::Numerical;
    case ErrorCode::Internal:
        return ErrorClass::Internal;
    default:
        return ErrorClass::Data;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace eclab
