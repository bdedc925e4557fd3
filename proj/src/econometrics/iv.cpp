#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/stats.hpp"
#include "econometrics/design.hpp"
#include "econometrics/econometrics.hpp"

namespace eclab::econometrics {

namespace {

using Eigen::Index;

RegressionResult linear_fit(const std::string& name, const std::vector<std::string>& terms, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y, const detail::Design& d, const ModelSpec& spec) {
    const auto ls = detail::least_squares(x, y, terms);
    RegressionResult r;
    r.name = name;
    r.estimator = "ols";
    r.terms = terms;
    r.n_fe_dummies = d.n_fe_dummies;
    r.coef = ls.coef;
    r.n = static_cast<std::size_t>(x.rows());
    r.k = static_cast<std::size_t>(x.cols());
    r.se_type = spec.se.type;
    r.cluster_var = spec.se.type == SeType::Clustered ? spec.se.cluster : "";
    r.rows_used = d.rows;
    r.residuals = ls.resid;
    detail::linear_covariance(r, ls.xtx_inv, x, ls.resid, d.clusters);
    detail::finalize_inference(r);
    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    if (tss > 0.0) {
        r.r2 = 1.0 - ls.resid.squaredNorm() / tss;
        r.adj_r2 = 1.0 - (1.0 - *r.r2) * static_cast<double>(r.n - 1) / static_cast<double>(r.n - r.k);
    }
    return r;
}

}  // namespace

IvResult tsls(const ModelSpec& spec, const std::string& endogenous, const std::string& instrument,
              const DataTable& data) {
    std::optional<std::size_t> pos;
    for (std::size_t j = 0; j < spec.covariates.size(); ++j)
        if (spec.covariates[j].column == endogenous || spec.covariates[j].label() == endogenous) pos = j + 1;
    if (!pos) fail(ErrorCode::InvalidArgument, "endogenous regressor '" + endogenous + "' is not a covariate");
    for (const auto& c : spec.covariates)
        if (c.column == instrument && instrument != endogenous)
            fail(ErrorCode::InvalidArgument, "instrument '" + instrument + "' is also an included covariate");

    detail::DesignOptions dopts;
    dopts.extra_column = instrument;
    const auto d = detail::build_design(spec, data, dopts);
    const Index n = d.x.rows(), k = d.x.cols(), j = static_cast<Index>(*pos);
    if (n <= k)
        fail(ErrorCode::RankDeficient, "model '" + spec.name + "' has " + std::to_string(n) +
                                           " observations for " + std::to_string(k) + " parameters");

    Eigen::MatrixXd z = d.x;
    z.col(j) = d.extra;
    auto z_terms = d.terms;
    z_terms[static_cast<std::size_t>(j)] = instrument;
    detail::require_full_rank(z, z_terms);
    detail::require_full_rank(d.x, d.terms);

    IvResult out;
    out.endogenous = d.terms[static_cast<std::size_t>(j)];
    out.instrument = instrument;

    // First stage: endogenous regressor on the instrument and included exogenous columns.
    const Eigen::VectorXd endog = d.x.col(j);
    out.first_stage = linear_fit(spec.name + " [first stage]", z_terms, z, endog, d, spec);
    const double t_instr = out.first_stage.stat(j);
    out.weak_instrument_f = t_instr * t_instr;
    out.weak_instrument_p = stats::f_upper_pvalue(out.weak_instrument_f, 1.0, out.first_stage.df);
    out.weak_instrument_warning = !(out.weak_instrument_f >= 10.0);

    // Second stage on the projection X̂ = Q Q'X from the thin QR of Z.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    const Eigen::MatrixXd xhat = q * (q.transpose() * d.x);
    const auto ls = detail::least_squares(xhat, d.y, d.terms);
    const Eigen::VectorXd u = d.y - d.x * ls.coef;  // structural residuals

    auto& r = out.second_stage;
    r.name = spec.name;
    r.estimator = "2sls";
    r.terms = d.terms;
    r.n_fe_dummies = d.n_fe_dummies;
    r.coef = ls.coef;
    r.n = static_cast<std::size_t>(n);
    r.k = static_cast<std::size_t>(k);
    r.se_type = spec.se.type;
    r.cluster_var = spec.se.type == SeType::Clustered ? spec.se.cluster : "";
    r.rows_used = d.rows;
    r.residuals = u;
    detail::linear_covariance(r, ls.xtx_inv, xhat, u, d.clusters);
    detail::finalize_inference(r);
    const double tss = (d.y.array() - d.y.mean()).matrix().squaredNorm();
    if (tss > 0.0) {
        r.r2 = 1.0 - u.squaredNorm() / tss;
        r.adj_r2 = 1.0 - (1.0 - *r.r2) * static_cast<double>(n - 1) / static_cast<double>(n - k);
    }
    r.r2_nonstandard = true;
    if (out.weak_instrument_warning)
        r.warnings.push_back("WeakInstrumentWarning: first-stage F = " + std::to_string(out.weak_instrument_f) +
                             " < 10");

    // Durbin-Wu-Hausman via control function.
    const Eigen::VectorXd v = out.first_stage.residuals;
    if (v.norm() <= 1e-10 * std::max(1.0, endog.norm())) {
        out.dwh_stat = 0.0;
        out.dwh_p = 1.0;
    } else {
        Eigen::MatrixXd xc(n, k + 1);
        xc << d.x, v;
        auto terms = d.terms;
        terms.push_back("first_stage_residual");
        const auto cf = linear_fit(spec.name + " [control function]", terms, xc, d.y, d, spec);
        out.dwh_stat = cf.stat(k);
        out.dwh_p = cf.p(k);
    }
    return out;
}

}  // namespace eclab::econometrics
