#include "complexity/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "common/csv.hpp"
#include "common/stats.hpp"

namespace eclab::complexity {

using specialization::SpecializationMatrix;
using Eigen::Index;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::vector<double> pci_map(const SpecializationMatrix& m, const std::vector<double>& eci) {
    std::vector<double> out(m.n_activities(), 0.0);
    for (std::size_t l = 0; l < m.n_activities(); ++l) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.n_countries(); ++c)
            if (m.at(c, l)) s += eci[c];
        out[l] = s / m.ubiquity()[l];
    }
    return out;
}

std::vector<double> eci_map(const SpecializationMatrix& m, const std::vector<double>& pci) {
    std::vector<double> out(m.n_countries(), 0.0);
    for (std::size_t c = 0; c < m.n_countries(); ++c) {
        double s = 0.0;
        for (std::size_t l = 0; l < m.n_activities(); ++l)
            if (m.at(c, l)) s += pci[l];
        out[c] = s / m.diversity()[c];
    }
    return out;
}

// Spread below this (relative to magnitude) counts as a constant vector.
bool has_spread(const std::vector<double>& xs) {
    if (xs.size() < 2) return false;
    double scale = 0.0;
    for (double x : xs) scale = std::max(scale, std::fabs(x));
    return stats::pop_stddev(xs) > 1e-12 * std::max(1.0, scale);
}

std::vector<double> standardized_or_throw(const std::vector<double>& xs, const char* what) {
    if (!has_spread(xs))
        fail(ErrorCode::DegenerateSpectrum, std::string(what) + " has zero variance");
    return stats::standardize(xs);
}

void check_preconditions(const SpecializationMatrix& m) {
    m.require_nonempty_margins();
    if (m.n_countries() < 2) fail(ErrorCode::DegenerateSpectrum, "need at least two countries");
    bool all_same = true;
    for (std::size_t c = 1; c < m.n_countries() && all_same; ++c)
        for (std::size_t l = 0; l < m.n_activities(); ++l)
            if (m.at(c, l) != m.at(0, l)) {
                all_same = false;
                break;
            }
    if (all_same)
        fail(ErrorCode::DegenerateSpectrum, "all countries have identical specialization rows");
}

// Returns +1 or -1 so that sign * eci correlates positively with diversity. When
// diversity is constant, falls back to a negative correlation with the mean
// ubiquity of each country's activities, then to a positive first nonzero entry.
double orientation(const SpecializationMatrix& m, const std::vector<double>& eci) {
    std::vector<double> div(m.diversity().begin(), m.diversity().end());
    if (has_spread(div)) return stats::pearson(eci, div) >= 0.0 ? 1.0 : -1.0;

    std::vector<double> avg_ubi(m.n_countries(), 0.0);
    for (std::size_t c = 0; c < m.n_countries(); ++c) {
        double s = 0.0;
        for (std::size_t l = 0; l < m.n_activities(); ++l)
            if (m.at(c, l)) s += m.ubiquity()[l];
        avg_ubi[c] = s / m.diversity()[c];
    }
    if (has_spread(avg_ubi)) return stats::pearson(eci, avg_ubi) <= 0.0 ? 1.0 : -1.0;

    for (double v : eci)
        if (std::fabs(v) > 1e-12) return v > 0.0 ? 1.0 : -1.0;
    return 1.0;
}

void finish(const SpecializationMatrix& m, ComplexityScores& s) {
    const double sign = orientation(m, s.eci_z);
    if (sign < 0.0) {
        for (auto& v : s.eci_z) v = -v;
        for (auto& v : s.eci_raw) v = -v;
    }
    s.pci_raw = pci_map(m, s.eci_z);
    s.pci_z = standardized_or_throw(s.pci_raw, "PCI");
    s.countries = m.countries();
    s.activities = m.activities();
    if (!country_graph_connected(m))
        s.warnings.push_back("country graph is disconnected; ECI separates components");
}

// S = A A^T with A = D_c^{-1/2} M D_l^{-1/2}; shares its spectrum with the
// row-stochastic country-country matrix.
Eigen::MatrixXd scaled_incidence(const SpecializationMatrix& m) {
    Eigen::MatrixXd a(idx(m.n_countries()), idx(m.n_activities()));
    for (std::size_t c = 0; c < m.n_countries(); ++c)
        for (std::size_t l = 0; l < m.n_activities(); ++l)
            a(idx(c), idx(l)) = m.at(c, l)
                                    ? 1.0 / std::sqrt(static_cast<double>(m.diversity()[c]) *
                                                      static_cast<double>(m.ubiquity()[l]))
                                    : 0.0;
    return a;
}

struct PowerResult {
    Eigen::VectorXd vector;
    double value = 0.0;
};

PowerResult deflated_power(const Eigen::MatrixXd& a, const std::vector<Eigen::VectorXd>& basis,
                           const EigenOptions& opts) {
    const Index n = a.rows();
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i + 1));
    auto deflate = [&](Eigen::VectorXd& v) {
        for (const auto& b : basis) v -= b.dot(v) * b;
    };
    deflate(x);
    x.normalize();
    for (int it = 0; it < opts.power_max_iter; ++it) {
        Eigen::VectorXd y = a * (a.transpose() * x);
        deflate(y);
        const double norm = y.norm();
        if (norm == 0.0) return {x, 0.0};
        Eigen::VectorXd next = y / norm;
        const double change = (next - x).lpNorm<Eigen::Infinity>();
        x = std::move(next);
        if (change < opts.power_tol) break;
        if (it + 1 == opts.power_max_iter)
            fail(ErrorCode::NoConvergence, "power iteration did not converge");
    }
    const double lambda = x.dot(a * (a.transpose() * x));
    return {x, lambda};
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    return m == Method::Eigen ? "eigen" : "iterate";
}

Method parse_method(std::string_view s) {
    if (s == "eigen") return Method::Eigen;
    if (s == "iterate" || s == "fixed-point") return Method::FixedPoint;
    fail(ErrorCode::InvalidArgument, "unknown complexity method '" + std::string(s) + "' (expected eigen or iterate)");
}

bool country_graph_connected(const SpecializationMatrix& m) {
    const auto n = m.n_countries();
    if (n <= 1) return true;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t l = 0; l < m.n_activities(); ++l) {
        std::optional<std::size_t> first;
        for (std::size_t c = 0; c < n; ++c) {
            if (!m.at(c, l)) continue;
            if (!first) first = c;
            else parent[find(c)] = find(*first);
        }
    }
    const auto root = find(0);
    for (std::size_t c = 1; c < n; ++c)
        if (find(c) != root) return false;
    return true;
}

ComplexityScores compute_complexity_fixed_point(const SpecializationMatrix& m,
                                                const FixedPointOptions& opts) {
    if (!(opts.tol > 0.0) || opts.max_iter < 1)
        fail(ErrorCode::InvalidArgument, "fixed point: tol must be > 0 and max_iter >= 1");
    check_preconditions(m);

    ComplexityScores s;
    s.method = Method::FixedPoint;

    std::vector<double> eci(m.diversity().begin(), m.diversity().end());
    if (has_spread(eci)) {
        eci = stats::standardize(eci);
    } else {
        // Constant diversity: start from a deterministic non-constant vector.
        for (std::size_t c = 0; c < eci.size(); ++c) eci[c] = static_cast<double>(c);
        eci = stats::standardize(eci);
        s.warnings.push_back("diversity is constant; fixed point started from label order");
    }

    std::vector<double> raw;
    double delta = 0.0;
    int it = 0;
    bool converged = false;
    while (it < opts.max_iter) {
        ++it;
        const auto pci = standardized_or_throw(pci_map(m, eci), "PCI");
        raw = eci_map(m, pci);
        const auto next = standardized_or_throw(raw, "ECI");
        delta = 0.0;
        for (std::size_t c = 0; c < next.size(); ++c) delta = std::max(delta, std::fabs(next[c] - eci[c]));
        eci = next;
        if (delta < opts.tol) {
            converged = true;
            break;
        }
    }

    s.eci_raw = raw;
    s.eci_z = eci;
    s.iterations = it;
    s.residual = delta;
    if (!converged) {
        std::ostringstream msg;
        msg << "fixed point not reached after " << it << " iterations (residual " << delta << ")";
        s.countries = m.countries();
        s.activities = m.activities();
        throw NoConvergenceError(msg.str(), s);
    }
    finish(m, s);
    return s;
}

ComplexityScores compute_complexity_eigen(const SpecializationMatrix& m, const EigenOptions& opts) {
    check_preconditions(m);
    const auto n = m.n_countries();
    const Eigen::MatrixXd a = scaled_incidence(m);

    double lambda1 = 0.0, lambda2 = 0.0;
    std::optional<double> lambda3;
    Eigen::VectorXd u;
    int iterations = 0;
    if (n <= opts.dense_limit) {
        const Eigen::MatrixXd s = a * a.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        if (solver.info() != Eigen::Success)
            fail(ErrorCode::NoConvergence, "dense eigensolver failed");
        const auto& ev = solver.eigenvalues();  // ascending
        lambda1 = ev(idx(n - 1));
        lambda2 = ev(idx(n - 2));
        if (n >= 3) lambda3 = ev(idx(n - 3));
        u = solver.eigenvectors().col(idx(n - 2));
    } else {
        // The leading eigenvector of S is proportional to sqrt(diversity).
        Eigen::VectorXd u1(idx(n));
        for (std::size_t c = 0; c < n; ++c) u1(idx(c)) = std::sqrt(static_cast<double>(m.diversity()[c]));
        u1.normalize();
        lambda1 = u1.dot(a * (a.transpose() * u1));
        auto second = deflated_power(a, {u1}, opts);
        u = second.vector;
        lambda2 = second.value;
        auto third = deflated_power(a, {u1, u}, opts);
        lambda3 = third.value;
        iterations = 1;
    }

    if (std::fabs(lambda1 - lambda2) < opts.repeated_tol ||
        (lambda3 && std::fabs(lambda2 - *lambda3) < opts.repeated_tol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "second eigenvalue " << lambda2 << " is not simple";
        fail(ErrorCode::RepeatedEigenvalue, msg.str());
    }

    // Back-transform to an eigenvector of the row-stochastic matrix.
    std::vector<double> v(n);
    for (std::size_t c = 0; c < n; ++c)
        v[c] = u(idx(c)) / std::sqrt(static_cast<double>(m.diversity()[c]));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    ComplexityScores s;
    s.method = Method::Eigen;
    s.eci_raw = v;
    s.eci_z = standardized_or_throw(v, "ECI");
    s.second_eigenvalue = lambda2;
    s.iterations = iterations;
    s.residual = 0.0;
    finish(m, s);

    // Residual of the eigen-equation for the reported vector, as a diagnostic.
    const auto back = eci_map(m, pci_map(m, s.eci_raw));
    double res = 0.0;
    for (std::size_t c = 0; c < n; ++c) res = std::max(res, std::fabs(back[c] - lambda2 * s.eci_raw[c]));
    s.residual = res;
    return s;
}

RescaledScores rescale_minmax(std::span<const double> values) {
    if (values.size() < 2) fail(ErrorCode::ConstantSeries, "rescale needs at least two values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) fail(ErrorCode::ConstantSeries, "series has no two distinct values");
    RescaledScores out;
    out.source_min = *lo;
    out.source_max = *hi;
    out.values.reserve(values.size());
    const double span = *hi - *lo;
    for (double v : values) out.values.push_back(2.0 * (v - *lo) / span - 1.0);
    return out;
}

std::vector<RankEntry> rank_table(const Labels& labels, std::span<const double> values) {
    if (labels.size() != values.size())
        fail(ErrorCode::InvalidArgument, "rank_table: labels and values differ in length");
    std::vector<RankEntry> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({labels[i], values[i], 0});
    std::sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.label < b.label;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
    return out;
}

ComplexityScores compute_complexity(const SpecializationMatrix& m, Method method) {
    return method == Method::Eigen ? compute_complexity_eigen(m) : compute_complexity_fixed_point(m);
}

std::string scores_to_csv(const Labels& labels, std::span<const double> raw, std::span<const double> z) {
    if (labels.size() != raw.size() || labels.size() != z.size())
        fail(ErrorCode::InvalidArgument, "scores_to_csv: length mismatch");
    const auto scaled = rescale_minmax(z);
    const auto ranks = rank_table(labels, z);
    std::vector<int> rank_of(labels.size());
    for (const auto& e : ranks)
        rank_of[static_cast<std::size_t>(std::find(labels.begin(), labels.end(), e.label) - labels.begin())] = e.rank;
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"entity", "raw", "z", "rescaled", "rank"});
    for (std::size_t i = 0; i < labels.size(); ++i)
        w.row({labels[i], csv::format_double(raw[i]), csv::format_double(z[i]), csv::format_double(scaled.values[i]),
               std::to_string(rank_of[i])});
    return out.str();
}

}  // namespace eclab::complexity
