#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "complexity/complexity.hpp"
#include "specialization/specialization.hpp"

namespace eclab::testing {

inline Labels make_labels(std::size_t n, const std::string& prefix) {
    Labels out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = std::to_string(i);
        out.push_back(prefix + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s);
    }
    return out;
}

inline specialization::SpecializationMatrix make_m(const std::vector<std::vector<int>>& rows) {
    const auto nc = rows.size();
    const auto nl = rows.empty() ? 0 : rows[0].size();
    Eigen::MatrixXd v(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nl));
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nl; ++j)
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return {make_labels(nc, "c"), make_labels(nl, "a"), v};
}

inline Eigen::MatrixXd random_counts(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            // Heavy-tailed, with some exact zeros.
            const double r = u(rng);
            x(i, j) = r < 0.1 ? 0.0 : std::floor(std::exp(6.0 * u(rng)));
        }
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, i % x.cols()) += 1.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(j % x.rows(), j) += 1.0;
    return x;
}

// Binary matrix with every margin nonempty and not every row identical.
inline specialization::SpecializationMatrix random_m(std::size_t rows, std::size_t cols, double density,
                                                     std::mt19937_64& rng) {
    std::bernoulli_distribution b(density);
    for (;;) {
        Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = b(rng) ? 1.0 : 0.0;
        bool ok = true;
        for (Eigen::Index i = 0; i < v.rows(); ++i) ok = ok && v.row(i).sum() > 0;
        for (Eigen::Index j = 0; j < v.cols(); ++j) ok = ok && v.col(j).sum() > 0;
        bool varied = false;
        for (Eigen::Index i = 1; i < v.rows(); ++i) varied = varied || v.row(i) != v.row(0);
        if (ok && varied) return {make_labels(rows, "c"), make_labels(cols, "a"), v};
    }
}

// Random M on which both complexity methods are well defined: connected
// country graph and a simple second eigenvalue.
inline specialization::SpecializationMatrix random_well_posed_m(std::size_t rows, std::size_t cols,
                                                                double density, std::mt19937_64& rng) {
    for (;;) {
        auto m = random_m(rows, cols, density, rng);
        if (!complexity::country_graph_connected(m)) continue;
        try {
            complexity::compute_complexity_eigen(m);
        } catch (const Error&) {
            continue;
        }
        return m;
    }
}

}  // namespace eclab::testing
