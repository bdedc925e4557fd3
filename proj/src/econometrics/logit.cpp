#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "econometrics/design.hpp"
#include "econometrics/econometrics.hpp"

namespace eclab::econometrics {

namespace {

using Eigen::Index;

constexpr double kSeparationEta = 15.0;
constexpr double kSeparationStep = 1e-3;

// log(1 + exp(x)) without overflow.
double log1pexp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Index i = 0; i < eta.size(); ++i) s += y(i) * eta(i) - log1pexp(eta(i));
    return s;
}

}  // namespace

RegressionResult logit(const ModelSpec& spec, const DataTable& data, const LogitOptions& opts) {
    detail::DesignOptions dopts;
    dopts.drop_constant_outcome_groups = !spec.fixed_effects.empty();
    auto d = detail::build_design(spec, data, dopts);
    const Index n = d.x.rows(), k = d.x.cols();

    for (Index i = 0; i < n; ++i)
        if (d.y(i) != 0.0 && d.y(i) != 1.0)
            fail(ErrorCode::InvalidArgument, "logit outcome '" + spec.outcome.label() + "' must be 0/1");
    const double ybar = d.y.mean();
    if (ybar == 0.0 || ybar == 1.0)
        fail(ErrorCode::ConstantSeries, "logit outcome '" + spec.outcome.label() + "' does not vary");
    // n == k with full rank is a saturated model; IRLS then runs into separation.
    detail::require_full_rank(d.x, d.terms);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double ll = loglik(eta, d.y);
    bool converged = false;
    int iter = 0;
    double last_step = 0.0;
    Eigen::MatrixXd hessian(k, k);
    auto compute_hessian = [&](const Eigen::VectorXd& e) {
        Eigen::VectorXd w(n);
        for (Index i = 0; i < n; ++i) {
            const double p = sigmoid(e(i));
            w(i) = p * (1.0 - p);
        }
        hessian = d.x.transpose() * w.asDiagonal() * d.x;
    };

    for (iter = 1; iter <= opts.max_iter; ++iter) {
        Eigen::VectorXd resid(n);
        for (Index i = 0; i < n; ++i) resid(i) = d.y(i) - sigmoid(eta(i));
        compute_hessian(eta);
        const Eigen::VectorXd grad = d.x.transpose() * resid;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        Eigen::VectorXd step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            if (eta.cwiseAbs().maxCoeff() > kSeparationEta)
                fail(ErrorCode::PerfectSeparation, "logit '" + spec.name + "': outcome is perfectly separated");
            fail(ErrorCode::DegenerateMatrix, "logit '" + spec.name + "': singular information matrix");
        }
        // Step halving keeps the likelihood monotone.
        double ll_new = ll;
        Eigen::VectorXd beta_new, eta_new;
        for (int h = 0; h < 40; ++h) {
            beta_new = beta + step;
            eta_new = d.x * beta_new;
            ll_new = loglik(eta_new, d.y);
            if (ll_new >= ll - 1e-12) break;
            step *= 0.5;
        }
        last_step = step.cwiseAbs().maxCoeff();
        const double change = std::abs(ll_new - ll);
        beta = beta_new;
        eta = eta_new;
        ll = ll_new;
        if (change < opts.tol) {
            converged = true;
            break;
        }
    }
    iter = std::min(iter, opts.max_iter);

    if (eta.cwiseAbs().maxCoeff() > kSeparationEta && last_step > kSeparationStep)
        fail(ErrorCode::PerfectSeparation, "logit '" + spec.name + "': outcome is perfectly separated");
    if (!converged)
        fail(ErrorCode::NoConvergence, "logit '" + spec.name + "' did not converge in " +
                                           std::to_string(opts.max_iter) + " iterations");

    compute_hessian(eta);
    const Eigen::MatrixXd bread = hessian.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    RegressionResult r;
    r.name = spec.name;
    r.estimator = "logit";
    r.terms = d.terms;
    r.n_fe_dummies = d.n_fe_dummies;
    r.coef = beta;
    r.n = static_cast<std::size_t>(n);
    r.k = static_cast<std::size_t>(k);
    r.se_type = spec.se.type;
    r.cluster_var = spec.se.type == SeType::Clustered ? spec.se.cluster : "";
    r.stat_kind = "z";
    r.converged = converged;
    r.iterations = iter;
    r.rows_used = d.rows;
    r.dropped_groups = d.dropped_groups;
    r.residuals.resize(n);
    for (Index i = 0; i < n; ++i) r.residuals(i) = d.y(i) - sigmoid(eta(i));

    const double nd = static_cast<double>(n);
    switch (spec.se.type) {
    case SeType::Classical: r.cov = bread; break;
    case SeType::Robust: {
        const Eigen::MatrixXd s = d.x.array().colwise() * r.residuals.array();
        r.cov = bread * detail::meat(s, {}, false, nullptr) * bread * (nd / (nd - 1.0));
        break;
    }
    case SeType::Clustered: {
        const Eigen::MatrixXd s = d.x.array().colwise() * r.residuals.array();
        std::size_t g_count = 0;
        const Eigen::MatrixXd mid = detail::meat(s, d.clusters, true, &g_count);
        if (g_count < 2) fail(ErrorCode::InvalidArgument, "clustered SEs need at least 2 clusters");
        const double g = static_cast<double>(g_count);
        r.cov = bread * mid * bread * (g / (g - 1.0));
        r.clusters = g_count;
        break;
    }
    }
    detail::finalize_inference(r);

    const double ll0 = nd * (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
    r.loglik = ll;
    r.loglik_null = ll0;
    r.pseudo_r2 = 1.0 - ll / ll0;
    r.bic = -2.0 * ll + static_cast<double>(k) * std::log(nd);
    if (!d.dropped_groups.empty())
        r.warnings.push_back(std::to_string(d.dropped_groups.size()) +
                             " fixed-effect groups dropped for lack of outcome variation");
    return r;
}

}  // namespace eclab::econometrics
