#include "econometrics/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/stats.hpp"

namespace eclab::econometrics {

std::string Term::label() const {
    std::string s = column;
    for (auto t : transforms) s = t == Transform::Log ? "log(" + s + ")" : s + "^2";
    return s;
}

std::string_view to_string(SeType t) noexcept {
    switch (t) {
    case SeType::Classical: return "classical";
    case SeType::Robust: return "robust";
    case SeType::Clustered: return "clustered";
    }
    return "robust";
}

std::size_t RegressionResult::index(const std::string& term) const {
    auto it = std::find(terms.begin(), terms.end(), term);
    if (it == terms.end()) fail(ErrorCode::InvalidArgument, "term '" + term + "' not in model");
    return static_cast<std::size_t>(it - terms.begin());
}

std::string significance_stars(double p) {
    if (!(p >= 0.0)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace eclab::econometrics

namespace eclab::econometrics::detail {

using Eigen::Index;

namespace {
Index idx(std::size_t i) { return static_cast<Index>(i); }
}  // namespace

double apply_transforms(double v, const std::vector<Transform>& ts) {
    for (auto t : ts) {
        if (t == Transform::Log) v = v > 0.0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN();
        else v = v * v;
    }
    return v;
}

Design build_design(const ModelSpec& spec, const DataTable& data, const DesignOptions& opts) {
    for (const auto& c : spec.covariates)
        if (c.label() == spec.outcome.label() || c.column == spec.outcome.column)
            fail(ErrorCode::InvalidArgument, "outcome '" + spec.outcome.column + "' also appears as a covariate");

    const auto y_col = data.column(spec.outcome.column);
    std::vector<std::size_t> x_cols;
    for (const auto& c : spec.covariates) x_cols.push_back(data.column(c.column));
    std::vector<std::size_t> fe_cols;
    for (const auto& f : spec.fixed_effects) fe_cols.push_back(data.column(f));
    const bool clustered = spec.se.type == SeType::Clustered;
    std::optional<std::size_t> cl_col;
    if (clustered) {
        if (spec.se.cluster.empty()) fail(ErrorCode::InvalidArgument, "clustered SEs need a cluster column");
        cl_col = data.column(spec.se.cluster);
    }
    std::optional<std::size_t> extra_col;
    if (opts.extra_column) extra_col = data.column(*opts.extra_column);
    std::optional<std::size_t> pop_col, exp_col, pat_col;
    if (spec.sample) {
        pop_col = data.column(spec.sample->population);
        exp_col = data.column(spec.sample->exports);
        pat_col = data.column(spec.sample->patents);
    }

    // Listwise deletion.
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        auto yv = data.number(y_col, r);
        if (!yv || !std::isfinite(apply_transforms(*yv, spec.outcome.transforms))) continue;
        bool ok = true;
        for (std::size_t j = 0; j < x_cols.size() && ok; ++j) {
            auto v = data.number(x_cols[j], r);
            ok = v && std::isfinite(apply_transforms(*v, spec.covariates[j].transforms));
        }
        for (auto fc : fe_cols) ok = ok && !data.text(fc, r).empty();
        if (cl_col) ok = ok && !data.text(*cl_col, r).empty();
        if (extra_col) {
            auto v = data.number(*extra_col, r);
            ok = ok && v && std::isfinite(*v);
        }
        if (ok && spec.sample) {
            auto pop = data.number(*pop_col, r);
            auto ex = data.number(*exp_col, r);
            auto pat = data.number(*pat_col, r);
            const auto& t = spec.sample->thresholds;
            ok = pop && ex && pat && *pop > t.min_population && *ex > t.min_exports_usd && *pat >= t.min_patents;
        }
        if (ok) rows.push_back(r);
    }

    Design d;
    if (opts.drop_constant_outcome_groups && !fe_cols.empty()) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t f = 0; f < fe_cols.size(); ++f) {
                std::map<std::string, std::pair<double, double>> range;
                for (auto r : rows) {
                    const double v = *data.number(y_col, r);
                    auto [it, inserted] = range.emplace(data.text(fe_cols[f], r), std::make_pair(v, v));
                    if (!inserted) {
                        it->second.first = std::min(it->second.first, v);
                        it->second.second = std::max(it->second.second, v);
                    }
                }
                std::set<std::string> constant;
                for (const auto& [level, mm] : range)
                    if (mm.first == mm.second) constant.insert(level);
                if (constant.empty()) continue;
                for (const auto& level : constant)
                    d.dropped_groups.push_back(spec.fixed_effects[f] + "=" + level);
                std::erase_if(rows, [&](std::size_t r) { return constant.count(data.text(fe_cols[f], r)) > 0; });
                changed = true;
            }
        }
    }

    if (rows.empty()) fail(ErrorCode::EmptySample, "no complete observations for model '" + spec.name + "'");

    // Fixed-effect levels among retained rows; the first level is the reference.
    std::vector<std::vector<std::string>> levels(fe_cols.size());
    for (std::size_t f = 0; f < fe_cols.size(); ++f) {
        std::set<std::string> s;
        for (auto r : rows) s.insert(data.text(fe_cols[f], r));
        levels[f].assign(s.begin(), s.end());
    }

    d.terms.push_back(kIntercept);
    for (const auto& c : spec.covariates) d.terms.push_back(c.label());
    d.n_covariates = spec.covariates.size();
    std::vector<std::map<std::string, std::size_t>> dummy_col(fe_cols.size());
    for (std::size_t f = 0; f < fe_cols.size(); ++f)
        for (std::size_t i = 1; i < levels[f].size(); ++i) {
            dummy_col[f][levels[f][i]] = d.terms.size();
            d.terms.push_back(spec.fixed_effects[f] + "=" + levels[f][i]);
            ++d.n_fe_dummies;
        }

    const auto n = rows.size(), k = d.terms.size();
    d.x = Eigen::MatrixXd::Zero(idx(n), idx(k));
    d.y.resize(idx(n));
    if (extra_col) d.extra.resize(idx(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = rows[i];
        d.y(idx(i)) = apply_transforms(*data.number(y_col, r), spec.outcome.transforms);
        d.x(idx(i), 0) = 1.0;
        for (std::size_t j = 0; j < x_cols.size(); ++j)
            d.x(idx(i), idx(j + 1)) = apply_transforms(*data.number(x_cols[j], r), spec.covariates[j].transforms);
        for (std::size_t f = 0; f < fe_cols.size(); ++f) {
            auto it = dummy_col[f].find(data.text(fe_cols[f], r));
            if (it != dummy_col[f].end()) d.x(idx(i), idx(it->second)) = 1.0;
        }
        if (cl_col) d.clusters.push_back(data.text(*cl_col, r));
        if (extra_col) d.extra(idx(i)) = *data.number(*extra_col, r);
    }
    d.rows = std::move(rows);
    return d;
}

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted_qr(const Eigen::MatrixXd& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    return qr;
}

[[noreturn]] void rank_error(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                             const std::vector<std::string>& names) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Index i = qr.rank(); i < perm.size(); ++i) {
        if (!cols.empty()) cols += ", ";
        cols += names[static_cast<std::size_t>(perm(i))];
    }
    fail(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                       std::to_string(names.size()) + "; collinear columns: " + cols);
}

}  // namespace

void require_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    const auto qr = pivoted_qr(x);
    if (qr.rank() < x.cols()) rank_error(qr, names);
}

LeastSquares least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<std::string>& names) {
    const auto qr = pivoted_qr(x);
    if (qr.rank() < x.cols()) rank_error(qr, names);
    LeastSquares out;
    out.coef = qr.solve(y);
    out.resid = y - x * out.coef;

    // (X'X)^{-1} = P R^{-1} R^{-T} P'
    const Index k = x.cols();
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
    const auto& p = qr.colsPermutation();
    out.xtx_inv = p * inner * p.transpose();
    return out;
}

std::size_t count_clusters(const std::vector<std::string>& clusters) {
    return std::set<std::string>(clusters.begin(), clusters.end()).size();
}

Eigen::MatrixXd meat(const Eigen::MatrixXd& scores, const std::vector<std::string>& clusters, bool clustered,
                     std::size_t* n_clusters) {
    const Index k = scores.cols();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    if (!clustered) {
        for (Index i = 0; i < scores.rows(); ++i) m.noalias() += scores.row(i).transpose() * scores.row(i);
        if (n_clusters) *n_clusters = static_cast<std::size_t>(scores.rows());
        return m;
    }
    std::map<std::string, Eigen::VectorXd> sums;
    for (Index i = 0; i < scores.rows(); ++i) {
        auto [it, inserted] = sums.try_emplace(clusters[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k));
        it->second += scores.row(i).transpose();
    }
    for (const auto& [g, s] : sums) m.noalias() += s * s.transpose();
    if (n_clusters) *n_clusters = sums.size();
    return m;
}

void finalize_inference(RegressionResult& r) {
    const Index k = r.coef.size();
    // Symmetrize away rounding asymmetry from the sandwich products.
    r.cov = 0.5 * (r.cov + r.cov.transpose()).eval();
    r.se.resize(k);
    r.stat.resize(k);
    r.p.resize(k);
    for (Index i = 0; i < k; ++i) {
        r.se(i) = std::sqrt(std::max(0.0, r.cov(i, i)));
        r.stat(i) = r.coef(i) / r.se(i);
        r.p(i) = r.stat_kind == "z" ? stats::two_sided_normal_pvalue(r.stat(i))
                                    : stats::two_sided_t_pvalue(r.stat(i), r.df);
    }
}

}  // namespace eclab::econometrics::detail
