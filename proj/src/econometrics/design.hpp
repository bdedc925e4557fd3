#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "econometrics/econometrics.hpp"

namespace eclab::econometrics::detail {

inline constexpr const char* kIntercept = "(intercept)";

struct DesignOptions {
    // Drop fixed-effect groups whose outcome never varies (dummy-variable logit).
    bool drop_constant_outcome_groups = false;
    // Column that must also be present for a row to enter (e.g. an instrument).
    std::optional<std::string> extra_column;
};

// Columns: intercept, covariates in spec order, then fixed-effect dummies.
struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> terms;
    std::size_t n_covariates = 0;
    std::size_t n_fe_dummies = 0;
    std::vector<std::size_t> rows;
    std::vector<std::string> clusters;  // per used row; empty unless clustered
    std::vector<std::string> dropped_groups;
    Eigen::VectorXd extra;  // values of DesignOptions::extra_column
};

double apply_transforms(double v, const std::vector<Transform>& ts);

Design build_design(const ModelSpec& spec, const DataTable& data, const DesignOptions& opts = {});

struct LeastSquares {
    Eigen::VectorXd coef;
    Eigen::MatrixXd xtx_inv;
    Eigen::VectorXd resid;
};

// Pivoted-QR least squares; throws RankDeficient naming the dependent columns.
LeastSquares least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<std::string>& names);

// Throws RankDeficient if x does not have full column rank.
void require_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names);

// Sum over observations (or clusters) of score outer products; scores are rows.
Eigen::MatrixXd meat(const Eigen::MatrixXd& scores, const std::vector<std::string>& clusters,
                     bool clustered, std::size_t* n_clusters);

// Fills se / stat / p from cov, using t(df) or the normal distribution.
void finalize_inference(RegressionResult& r);

std::size_t count_clusters(const std::vector<std::string>& clusters);

// Sets cov and df on r (n, k, se_type already filled) for a linear estimator with
// bread (X'X)^{-1}, regressors x and residuals u.
void linear_covariance(RegressionResult& r, const Eigen::MatrixXd& bread, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& u, const std::vector<std::string>& clusters);

}  // namespace eclab::econometrics::detail
