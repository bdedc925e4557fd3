#include "common/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "common/error.hpp"

namespace eclab::stats {

double sum(std::span<const double> xs) noexcept {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

double mean(std::span<const double> xs) noexcept {
    return xs.empty() ? 0.0 : sum(xs) / static_cast<double>(xs.size());
}

double pop_stddev(std::span<const double> xs) noexcept {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::vector<double> standardize(std::span<const double> xs) {
    const double m = mean(xs);
    const double s = pop_stddev(xs);
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - m) / s;
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        fail(ErrorCode::InvalidArgument, "pearson: series must have equal length >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double two_sided_t_pvalue(double t, double df) {
    if (!std::isfinite(t)) return std::isnan(t) ? t : 0.0;
    if (df <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double two_sided_normal_pvalue(double z) {
    if (!std::isfinite(z)) return std::isnan(z) ? z : 0.0;
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(z)));
}

double f_upper_pvalue(double f, double df1, double df2) {
    if (!std::isfinite(f)) return std::isnan(f) ? f : 0.0;
    if (df1 <= 0.0 || df2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, f)));
}

}  // namespace eclab::stats
