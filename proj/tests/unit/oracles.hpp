#pragma once

// Slow, loop-based reference implementations shared by unit and acceptance tests.
// None of them call into the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eclab::testing {

// R = X_cl X / (X_c X_l) by explicit loops.
inline Eigen::MatrixXd rca_oracle(const Eigen::MatrixXd& x) {
    const auto n = x.rows(), k = x.cols();
    double grand = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) grand += x(i, j);
    Eigen::MatrixXd r(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            double xc = 0.0, xl = 0.0;
            for (Eigen::Index jj = 0; jj < k; ++jj) xc += x(i, jj);
            for (Eigen::Index ii = 0; ii < n; ++ii) xl += x(ii, j);
            r(i, j) = x(i, j) * grand / (xc * xl);
        }
    return r;
}

// min(P(l|l'), P(l'|l)) by triple loop.
inline Eigen::MatrixXd phi_oracle(const Eigen::MatrixXd& m) {
    const auto k = m.cols();
    Eigen::MatrixXd phi(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            double co = 0.0, ka = 0.0, kb = 0.0;
            for (Eigen::Index c = 0; c < m.rows(); ++c) {
                co += m(c, a) * m(c, b);
                ka += m(c, a);
                kb += m(c, b);
            }
            phi(a, b) = std::min(co / ka, co / kb);
        }
    return phi;
}

inline Eigen::MatrixXd omega_oracle(const Eigen::MatrixXd& m, const Eigen::MatrixXd& phi, bool self) {
    Eigen::MatrixXd w(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.rows(); ++c)
        for (Eigen::Index l = 0; l < m.cols(); ++l) {
            double num = 0.0, den = 0.0;
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (!self && j == l) continue;
                num += m(c, j) * phi(l, j);
                den += phi(l, j);
            }
            w(c, l) = num / den;
        }
    return w;
}

// (X'X)^-1 (sum of score outer products) (X'X)^-1, no finite-sample factor.
// Scores are per observation, or summed within clusters when given.
inline Eigen::MatrixXd sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                                const std::vector<std::string>* clusters) {
    const Eigen::MatrixXd bread = (x.transpose() * x).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    if (!clusters) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) meat += u(i) * u(i) * x.row(i).transpose() * x.row(i);
    } else {
        std::map<std::string, Eigen::VectorXd> sums;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            auto& s = sums.try_emplace((*clusters)[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(x.cols()))
                          .first->second;
            s += u(i) * x.row(i).transpose();
        }
        for (const auto& [g, s] : sums) meat += s * s.transpose();
    }
    return bread * meat * bread;
}

// Plain Nelder-Mead minimizer.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   int iters) {
    const auto n = x0.size();
    std::vector<Eigen::VectorXd> simplex{x0};
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = x0;
        v(i) += 0.5;
        simplex.push_back(v);
    }
    std::vector<double> fv;
    for (auto& v : simplex) fv.push_back(f(v));
    for (int it = 0; it < iters; ++it) {
        std::vector<std::size_t> o(simplex.size());
        std::iota(o.begin(), o.end(), 0);
        std::sort(o.begin(), o.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> f2;
        for (auto i : o) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex = s2;
        fv = f2;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) c += simplex[static_cast<std::size_t>(i)] / static_cast<double>(n);
        auto& worst = simplex.back();
        Eigen::VectorXd r = c + (c - worst);
        const double fr = f(r);
        if (fr < fv[0]) {
            Eigen::VectorXd e = c + 2.0 * (c - worst);
            const double fe = f(e);
            if (fe < fr) {
                worst = e;
                fv.back() = fe;
            } else {
                worst = r;
                fv.back() = fr;
            }
        } else if (fr < fv[fv.size() - 2]) {
            worst = r;
            fv.back() = fr;
        } else {
            Eigen::VectorXd k = c + 0.5 * (worst - c);
            const double fk = f(k);
            if (fk < fv.back()) {
                worst = k;
                fv.back() = fk;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    return simplex[static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin())];
}

// Negative Bernoulli-logit log-likelihood.
inline double logit_negll(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double eta = x.row(i).dot(b);
        s -= y(i) * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)));
    }
    return s;
}

// Logit MLE by restarted Nelder-Mead from zero.
inline Eigen::VectorXd logit_search(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
    for (int restart = 0; restart < 8; ++restart)
        b = nelder_mead([&](const Eigen::VectorXd& v) { return logit_negll(x, y, v); }, b, 2000);
    return b;
}

}  // namespace eclab::testing
