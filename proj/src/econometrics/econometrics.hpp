#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "complexity/complexity.hpp"
#include "econometrics/data_table.hpp"
#include "ingest/ingest.hpp"
#include "specialization/specialization.hpp"

namespace eclab::econometrics {

enum class Transform { Log, Square };

// A column with transforms applied left to right, e.g. gdp_pc -> log -> square.
struct Term {
    std::string column;
    std::vector<Transform> transforms;

    std::string label() const;  // "log(gdp_pc)^2"
};

enum class SeType { Classical, Robust, Clustered };
std::string_view to_string(SeType t) noexcept;

struct SeSpec {
    SeType type = SeType::Robust;
    std::string cluster;  // column name when clustered
};

// Listwise sample restriction on the data columns population, exports_usd, patents.
struct SampleFilter {
    ingest::SampleThresholds thresholds;
    std::string population = "population";
    std::string exports = "exports_usd";
    std::string patents = "patents";
};

struct ModelSpec {
    std::string name;
    Term outcome;
    std::vector<Term> covariates;
    std::vector<std::string> fixed_effects;  // one dummy set per column, first level dropped
    SeSpec se;
    std::optional<SampleFilter> sample;
};

ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);

struct RegressionResult {
    std::string name;
    std::string estimator;  // ols | logit | 2sls
    std::vector<std::string> terms;  // includes "(intercept)" and fixed-effect dummies
    std::size_t n_fe_dummies = 0;
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;
    Eigen::VectorXd se;
    Eigen::VectorXd stat;
    Eigen::VectorXd p;
    std::string stat_kind = "t";  // t | z
    double df = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;
    SeType se_type = SeType::Robust;
    std::string cluster_var;
    std::optional<std::size_t> clusters;
    std::optional<double> r2;
    std::optional<double> adj_r2;
    std::optional<double> within_r2;
    std::optional<double> pseudo_r2;
    std::optional<double> bic;
    std::optional<double> loglik;
    std::optional<double> loglik_null;
    bool converged = true;
    int iterations = 0;
    bool r2_nonstandard = false;
    std::vector<std::string> warnings;
    std::vector<std::string> dropped_groups;
    std::vector<std::size_t> rows_used;  // row indices into the input table
    Eigen::VectorXd residuals;

    // Index of a term by label; throws InvalidArgument if absent.
    std::size_t index(const std::string& term) const;
};

struct IvResult {
    RegressionResult second_stage;
    RegressionResult first_stage;
    std::string endogenous;
    std::string instrument;
    double weak_instrument_f = 0.0;
    double weak_instrument_p = 0.0;
    bool weak_instrument_warning = false;
    double dwh_stat = 0.0;  // robust t on the control-function residual
    double dwh_p = 1.0;
};

nlohmann::json to_json(const RegressionResult& r);
nlohmann::json to_json(const IvResult& r);

RegressionResult ols(const ModelSpec& spec, const DataTable& data);

struct LogitOptions {
    int max_iter = 100;
    double tol = 1e-10;  // on the log-likelihood
};

RegressionResult logit(const ModelSpec& spec, const DataTable& data, const LogitOptions& opts = {});

// Exactly one endogenous covariate (must appear in spec.covariates) and one
// excluded instrument.
IvResult tsls(const ModelSpec& spec, const std::string& endogenous, const std::string& instrument,
              const DataTable& data);

struct InstrumentResult {
    std::map<std::string, double> values;
    std::map<std::string, std::vector<std::string>> peers;
    std::vector<std::string> dropped;  // no eligible non-neighboring peer
};

// Mean eci_z of the k most similar non-neighboring countries, similarity being
// co-specialization / max(diversity_c, diversity_c'). Ties by country code.
InstrumentResult build_similarity_instrument(const complexity::ComplexityScores& scores,
                                             const specialization::SpecializationMatrix& m,
                                             const ingest::NeighborGraph& g, int k = 3);

// "*" p<0.1, "**" p<0.05, "***" p<0.01
std::string significance_stars(double p);

struct ModelGridConfig {
    std::string country = "country";
    std::string eci_software = "eci_software";
    std::string eci_software_iv = "eci_software_iv";
    std::string eci_trade = "eci_trade";
    std::string eci_tech = "eci_tech";
    std::string eci_research = "eci_research";
    std::string gdp_pc = "gdp_pc";
    std::string population = "population";
    std::string natural_resources = "natural_resources";
    std::string gini = "gini_avg";
    std::string emissions = "emissions_per_gdp";
    SeType macro_se = SeType::Robust;
    SeType transition_se = SeType::Clustered;
    bool include_iv = true;
    bool include_logit = true;
};

nlohmann::json to_json(const ModelGridConfig& c);

struct ResultBundle {
    nlohmann::json json;
    std::string text;
};

// Estimates the macro (OLS + IV) and entry/exit (LPM + logit) specification
// grids. A failing column is recorded with its error instead of aborting the grid.
// Any of the inputs may be null, which skips the corresponding tables.
ResultBundle run_model_grid(const DataTable* countries, const DataTable* entry, const DataTable* exit,
                              const ModelGridConfig& config = {});

std::string format_text_table(const std::string& title, const std::vector<std::string>& columns,
                              const std::vector<const RegressionResult*>& results,
                              const std::vector<std::pair<std::string, std::vector<std::string>>>& extra_rows,
                              const std::map<std::string, std::string>& labels);

}  // namespace eclab::econometrics
