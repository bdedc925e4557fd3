#include <cmath>

#include "common/error.hpp"
#include "econometrics/design.hpp"
#include "econometrics/econometrics.hpp"

namespace eclab::econometrics {

namespace {

using Eigen::Index;

double rss_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    return (y - x * qr.solve(y)).squaredNorm();
}

}  // namespace

namespace detail {

// Linear-model covariance for a given bread (X'X)^{-1} and regressors x.
void linear_covariance(RegressionResult& r, const Eigen::MatrixXd& bread, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& u, const std::vector<std::string>& clusters) {
    const double n = static_cast<double>(r.n), k = static_cast<double>(r.k);
    switch (r.se_type) {
    case SeType::Classical:
        r.cov = bread * (u.squaredNorm() / (n - k));
        r.df = n - k;
        break;
    case SeType::Robust: {
        const Eigen::MatrixXd s = x.array().colwise() * u.array();
        r.cov = bread * meat(s, {}, false, nullptr) * bread * (n / (n - k));
        r.df = n - k;
        break;
    }
    case SeType::Clustered: {
        const Eigen::MatrixXd s = x.array().colwise() * u.array();
        std::size_t g_count = 0;
        const Eigen::MatrixXd mid = meat(s, clusters, true, &g_count);
        if (g_count < 2) fail(ErrorCode::InvalidArgument, "clustered SEs need at least 2 clusters");
        const double g = static_cast<double>(g_count);
        r.cov = bread * mid * bread * ((g / (g - 1.0)) * ((n - 1.0) / (n - k)));
        r.df = g - 1.0;
        r.clusters = g_count;
        break;
    }
    }
}

}  // namespace detail

RegressionResult ols(const ModelSpec& spec, const DataTable& data) {
    auto d = detail::build_design(spec, data);
    const auto n = static_cast<std::size_t>(d.x.rows()), k = static_cast<std::size_t>(d.x.cols());
    if (n <= k)
        fail(ErrorCode::RankDeficient, "model '" + spec.name + "' has " + std::to_string(n) +
                                           " observations for " + std::to_string(k) + " parameters");
    const auto ls = detail::least_squares(d.x, d.y, d.terms);

    RegressionResult r;
    r.name = spec.name;
    r.estimator = "ols";
    r.terms = d.terms;
    r.n_fe_dummies = d.n_fe_dummies;
    r.coef = ls.coef;
    r.n = n;
    r.k = k;
    r.se_type = spec.se.type;
    r.cluster_var = spec.se.type == SeType::Clustered ? spec.se.cluster : "";
    r.rows_used = d.rows;
    r.residuals = ls.resid;
    detail::linear_covariance(r, ls.xtx_inv, d.x, ls.resid, d.clusters);
    detail::finalize_inference(r);

    const double rss = ls.resid.squaredNorm();
    const double tss = (d.y.array() - d.y.mean()).matrix().squaredNorm();
    if (tss > 0.0) {
        r.r2 = 1.0 - rss / tss;
        r.adj_r2 = 1.0 - (1.0 - *r.r2) * static_cast<double>(n - 1) / static_cast<double>(n - k);
    }
    if (d.n_fe_dummies > 0) {
        // Within R²: share of the fixed-effects-only residual variation explained.
        Eigen::MatrixXd fe(d.x.rows(), static_cast<Index>(1 + d.n_fe_dummies));
        fe.col(0) = d.x.col(0);
        fe.rightCols(static_cast<Index>(d.n_fe_dummies)) = d.x.rightCols(static_cast<Index>(d.n_fe_dummies));
        const double rss_fe = rss_of(fe, d.y);
        if (rss_fe > 0.0) r.within_r2 = 1.0 - rss / rss_fe;
    }
    return r;
}

}  // namespace eclab::econometrics
