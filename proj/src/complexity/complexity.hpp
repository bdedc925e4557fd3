#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "specialization/specialization.hpp"

namespace eclab::complexity {

enum class Method { FixedPoint, Eigen };

std::string_view to_string(Method m) noexcept;
// "iterate" | "eigen"; throws InvalidArgument otherwise.
Method parse_method(std::string_view s);

// Country (ECI) and activity (PCI) scores. `*_z` are standardized with the
// population standard deviation and oriented so ECI correlates positively
// with diversity.
struct ComplexityScores {
    Labels countries;
    Labels activities;
    std::vector<double> eci_raw;
    std::vector<double> eci_z;
    std::vector<double> pci_raw;
    std::vector<double> pci_z;
    Method method = Method::FixedPoint;
    int iterations = 0;
    double residual = 0.0;
    std::optional<double> second_eigenvalue;
    std::vector<std::string> warnings;
};

struct FixedPointOptions {
    double tol = 1e-9;
    int max_iter = 1000;
};

struct EigenOptions {
    // Above this many countries the dense solver is replaced by power iteration
    // with the trivial eigenvector deflated.
    std::size_t dense_limit = 2000;
    double repeated_tol = 1e-10;
    double power_tol = 1e-13;
    int power_max_iter = 200000;
};

// Thrown when the fixed-point map hits max_iter; carries the last iterate.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& message, ComplexityScores last)
        : Error(ErrorCode::NoConvergence, message), last_(std::move(last)) {}

    const ComplexityScores& last_iterate() const noexcept { return last_; }

private:
    ComplexityScores last_;
};

ComplexityScores compute_complexity_fixed_point(const specialization::SpecializationMatrix& m,
                                                const FixedPointOptions& opts = {});

ComplexityScores compute_complexity_eigen(const specialization::SpecializationMatrix& m,
                                          const EigenOptions& opts = {});

// True when every country reaches every other through shared activities.
bool country_graph_connected(const specialization::SpecializationMatrix& m);

struct RescaledScores {
    std::vector<double> values;
    double source_min = 0.0;
    double source_max = 0.0;
};

// v -> 2 (v - min) / (max - min) - 1. Throws ConstantSeries without two distinct values.
RescaledScores rescale_minmax(std::span<const double> values);

struct RankEntry {
    std::string label;
    double value = 0.0;
    int rank = 0;  // 1-based
};

// Descending by value, ties by label.
std::vector<RankEntry> rank_table(const Labels& labels, std::span<const double> values);

// Dispatches on method with default options.
ComplexityScores compute_complexity(const specialization::SpecializationMatrix& m, Method method);

// entity,raw,z,rescaled,rank in input order; rescaled is z mapped onto [-1, 1].
std::string scores_to_csv(const Labels& labels, std::span<const double> raw, std::span<const double> z);

}  // namespace eclab::complexity
