#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eclab {

enum class ErrorCode {
    InvalidArgument,
    Validation,
    Io,
    MissingColumn,
    DuplicateKey,
    UnparsableRow,
    EmptyAfterFilter,
    SelfLoop,
    YearNotFound,
    EmptyMatrix,
    DegenerateMatrix,
    DegenerateSpectrum,
    NoConvergence,
    RepeatedEigenvalue,
    ConstantSeries,
    ZeroUbiquity,
    ZeroDenominator,
    WindowOverlap,
    YearMissing,
    EmptyAtRiskSet,
    InsufficientOverlap,
    RankDeficient,
    EmptySample,
    PerfectSeparation,
    Internal,
};

// Broad classes used for process exit codes and the C status mapping.
enum class ErrorClass { Validation, Data, Numerical, Internal };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    // Message without the leading code name.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace eclab
