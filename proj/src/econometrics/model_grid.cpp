#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "econometrics/design.hpp"
#include "econometrics/econometrics.hpp"

namespace eclab::econometrics {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

Transform parse_transform(const std::string& s) {
    if (s == "log") return Transform::Log;
    if (s == "square" || s == "sq") return Transform::Square;
    fail(ErrorCode::Validation, "unknown transform '" + s + "' (expected log or square)");
}

std::string transform_name(Transform t) { return t == Transform::Log ? "log" : "square"; }

Term term_from_json(const json& j, const std::string& field) {
    Term t;
    if (j.is_string()) {
        std::stringstream ss(j.get<std::string>());
        std::string part;
        std::getline(ss, t.column, ':');
        while (std::getline(ss, part, ':')) t.transforms.push_back(parse_transform(part));
    } else if (j.is_object()) {
        for (const auto& [key, v] : j.items())
            if (key != "column" && key != "transforms")
                fail(ErrorCode::Validation, field + ": unknown key '" + key + "'");
        if (!j.contains("column") || !j["column"].is_string())
            fail(ErrorCode::Validation, field + ": 'column' must be a string");
        t.column = j["column"].get<std::string>();
        if (j.contains("transforms")) {
            if (!j["transforms"].is_array()) fail(ErrorCode::Validation, field + ": 'transforms' must be an array");
            for (const auto& x : j["transforms"]) {
                if (!x.is_string()) fail(ErrorCode::Validation, field + ": transforms must be strings");
                t.transforms.push_back(parse_transform(x.get<std::string>()));
            }
        }
    } else {
        fail(ErrorCode::Validation, field + ": expected a column name or {column, transforms}");
    }
    if (t.column.empty()) fail(ErrorCode::Validation, field + ": empty column name");
    return t;
}

json term_to_json(const Term& t) {
    json tr = json::array();
    for (auto x : t.transforms) tr.push_back(transform_name(x));
    return {{"column", t.column}, {"transforms", tr}};
}

SeSpec se_from_json(const json& j) {
    SeSpec se;
    std::string type;
    if (j.is_string()) {
        type = j.get<std::string>();
        const auto open = type.find('(');
        if (open != std::string::npos && type.back() == ')') {
            se.cluster = type.substr(open + 1, type.size() - open - 2);
            type = type.substr(0, open);
        }
    } else if (j.is_object()) {
        for (const auto& [key, v] : j.items())
            if (key != "type" && key != "cluster") fail(ErrorCode::Validation, "se: unknown key '" + key + "'");
        if (!j.contains("type") || !j["type"].is_string()) fail(ErrorCode::Validation, "se: 'type' must be a string");
        type = j["type"].get<std::string>();
        if (j.contains("cluster")) {
            if (!j["cluster"].is_string()) fail(ErrorCode::Validation, "se: 'cluster' must be a string");
            se.cluster = j["cluster"].get<std::string>();
        }
    } else {
        fail(ErrorCode::Validation, "se: expected a string or {type, cluster}");
    }
    if (type == "classical") se.type = SeType::Classical;
    else if (type == "robust" || type == "hc1") se.type = SeType::Robust;
    else if (type == "clustered" || type == "cluster") se.type = SeType::Clustered;
    else fail(ErrorCode::Validation, "se: unknown type '" + type + "'");
    if (se.type == SeType::Clustered && se.cluster.empty())
        fail(ErrorCode::Validation, "se: clustered SEs need a cluster column");
    if (se.type != SeType::Clustered && !se.cluster.empty())
        fail(ErrorCode::Validation, "se: cluster given for non-clustered SEs");
    return se;
}

double number_field(const json& j, const char* key, double fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(ErrorCode::Validation, ctx + ": '" + key + "' must be a number");
    return j[key].get<double>();
}

std::string string_field(const json& j, const char* key, const std::string& fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) fail(ErrorCode::Validation, ctx + ": '" + key + "' must be a string");
    return j[key].get<std::string>();
}

}  // namespace

ModelSpec model_spec_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "model spec must be a JSON object");
    static const std::set<std::string> keys = {"name", "outcome", "covariates", "fixed_effects", "se", "sample"};
    for (const auto& [key, v] : j.items())
        if (!keys.count(key)) fail(ErrorCode::Validation, "model spec: unknown key '" + key + "'");
    ModelSpec s;
    s.name = string_field(j, "name", "model", "model spec");
    if (!j.contains("outcome")) fail(ErrorCode::Validation, "model spec: 'outcome' is required");
    s.outcome = term_from_json(j["outcome"], "outcome");
    if (j.contains("covariates")) {
        if (!j["covariates"].is_array()) fail(ErrorCode::Validation, "model spec: 'covariates' must be an array");
        for (std::size_t i = 0; i < j["covariates"].size(); ++i)
            s.covariates.push_back(term_from_json(j["covariates"][i], "covariates[" + std::to_string(i) + "]"));
    }
    if (j.contains("fixed_effects")) {
        if (!j["fixed_effects"].is_array()) fail(ErrorCode::Validation, "model spec: 'fixed_effects' must be an array");
        for (const auto& f : j["fixed_effects"]) {
            if (!f.is_string()) fail(ErrorCode::Validation, "model spec: fixed_effects entries must be strings");
            s.fixed_effects.push_back(f.get<std::string>());
        }
    }
    if (j.contains("se")) s.se = se_from_json(j["se"]);
    if (j.contains("sample")) {
        const auto& sj = j["sample"];
        if (sj.is_boolean()) {
            if (sj.get<bool>()) s.sample = SampleFilter{};
        } else if (sj.is_object()) {
            static const std::set<std::string> skeys = {"min_population", "min_exports_usd", "min_patents",
                                                        "population", "exports_usd", "patents"};
            for (const auto& [key, v] : sj.items())
                if (!skeys.count(key)) fail(ErrorCode::Validation, "sample: unknown key '" + key + "'");
            SampleFilter f;
            f.thresholds.min_population = number_field(sj, "min_population", f.thresholds.min_population, "sample");
            f.thresholds.min_exports_usd =
                number_field(sj, "min_exports_usd", f.thresholds.min_exports_usd, "sample");
            f.thresholds.min_patents = number_field(sj, "min_patents", f.thresholds.min_patents, "sample");
            f.population = string_field(sj, "population", f.population, "sample");
            f.exports = string_field(sj, "exports_usd", f.exports, "sample");
            f.patents = string_field(sj, "patents", f.patents, "sample");
            s.sample = f;
        } else {
            fail(ErrorCode::Validation, "sample: expected a boolean or an object");
        }
    }
    return s;
}

json to_json(const ModelSpec& s) {
    json cov = json::array();
    for (const auto& c : s.covariates) cov.push_back(term_to_json(c));
    json se = {{"type", std::string(to_string(s.se.type))}};
    if (s.se.type == SeType::Clustered) se["cluster"] = s.se.cluster;
    json out = {{"name", s.name},
                {"outcome", term_to_json(s.outcome)},
                {"covariates", cov},
                {"fixed_effects", s.fixed_effects},
                {"se", se}};
    if (s.sample)
        out["sample"] = {{"min_population", s.sample->thresholds.min_population},
                         {"min_exports_usd", s.sample->thresholds.min_exports_usd},
                         {"min_patents", s.sample->thresholds.min_patents},
                         {"population", s.sample->population},
                         {"exports_usd", s.sample->exports},
                         {"patents", s.sample->patents}};
    return out;
}

json to_json(const RegressionResult& r) {
    json coefs = json::array();
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        coefs.push_back({{"term", r.terms[i]},
                         {"coef", number(r.coef(e))},
                         {"se", number(r.se(e))},
                         {r.stat_kind, number(r.stat(e))},
                         {"p", number(r.p(e))},
                         {"stars", significance_stars(r.p(e))}});
    }
    json cov = json::array();
    for (Eigen::Index i = 0; i < r.cov.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < r.cov.cols(); ++c) row.push_back(number(r.cov(i, c)));
        cov.push_back(row);
    }
    json out = {{"name", r.name},
                {"estimator", r.estimator},
                {"coefficients", coefs},
                {"covariance", cov},
                {"n", r.n},
                {"k", r.k},
                {"n_fe_dummies", r.n_fe_dummies},
                {"df", number(r.df)},
                {"stat_kind", r.stat_kind},
                {"se_type", std::string(to_string(r.se_type))},
                {"r2", optional_number(r.r2)},
                {"adj_r2", optional_number(r.adj_r2)},
                {"within_r2", optional_number(r.within_r2)},
                {"pseudo_r2", optional_number(r.pseudo_r2)},
                {"bic", optional_number(r.bic)},
                {"loglik", optional_number(r.loglik)},
                {"loglik_null", optional_number(r.loglik_null)},
                {"converged", r.converged},
                {"iterations", r.iterations},
                {"r2_nonstandard", r.r2_nonstandard},
                {"warnings", r.warnings},
                {"dropped_groups", r.dropped_groups}};
    if (r.se_type == SeType::Clustered) {
        out["cluster_var"] = r.cluster_var;
        out["clusters"] = r.clusters ? json(*r.clusters) : json(nullptr);
    }
    return out;
}

json to_json(const IvResult& r) {
    return {{"second_stage", to_json(r.second_stage)},
            {"first_stage", to_json(r.first_stage)},
            {"endogenous", r.endogenous},
            {"instrument", r.instrument},
            {"weak_instrument_f", number(r.weak_instrument_f)},
            {"weak_instrument_p", number(r.weak_instrument_p)},
            {"weak_instrument_warning", r.weak_instrument_warning},
            {"dwh_stat", number(r.dwh_stat)},
            {"dwh_p", number(r.dwh_p)}};
}

json to_json(const ModelGridConfig& c) {
    return {{"country", c.country},
            {"eci_software", c.eci_software},
            {"eci_software_iv", c.eci_software_iv},
            {"eci_trade", c.eci_trade},
            {"eci_tech", c.eci_tech},
            {"eci_research", c.eci_research},
            {"gdp_pc", c.gdp_pc},
            {"population", c.population},
            {"natural_resources", c.natural_resources},
            {"gini", c.gini},
            {"emissions", c.emissions},
            {"macro_se", std::string(to_string(c.macro_se))},
            {"transition_se", std::string(to_string(c.transition_se))},
            {"include_iv", c.include_iv},
            {"include_logit", c.include_logit}};
}

namespace {

std::string fixed3(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

}  // namespace

std::string format_text_table(const std::string& title, const std::vector<std::string>& columns,
                              const std::vector<const RegressionResult*>& results,
                              const std::vector<std::pair<std::string, std::vector<std::string>>>& extra_rows,
                              const std::map<std::string, std::string>& labels) {
    // Covariate rows in order of first appearance; intercept and FE dummies omitted.
    std::vector<std::string> order;
    for (const auto* r : results) {
        if (!r) continue;
        const auto n_cov = r->terms.size() - r->n_fe_dummies;
        for (std::size_t i = 1; i < n_cov; ++i)
            if (std::find(order.begin(), order.end(), r->terms[i]) == order.end()) order.push_back(r->terms[i]);
    }

    std::vector<std::vector<std::string>> rows;
    rows.push_back({""});
    for (const auto& c : columns) rows.back().push_back(c);
    for (const auto& term : order) {
        auto it = labels.find(term);
        std::vector<std::string> coef_row{it != labels.end() ? it->second : term}, se_row{""};
        for (const auto* r : results) {
            auto pos = r ? std::find(r->terms.begin(), r->terms.end(), term) : std::vector<std::string>::const_iterator{};
            if (!r || pos == r->terms.end()) {
                coef_row.emplace_back("");
                se_row.emplace_back("");
                continue;
            }
            const auto i = static_cast<Eigen::Index>(pos - r->terms.begin());
            coef_row.push_back(fixed3(r->coef(i)) + significance_stars(r->p(i)));
            se_row.push_back("(" + fixed3(r->se(i)) + ")");
        }
        rows.push_back(coef_row);
        rows.push_back(se_row);
    }
    for (const auto& [name, vals] : extra_rows) {
        rows.push_back({name});
        for (const auto& v : vals) rows.back().push_back(v);
    }
    auto stat_row = [&](const std::string& name, const std::function<std::string(const RegressionResult&)>& f) {
        std::vector<std::string> row{name};
        bool any = false;
        for (const auto* r : results) {
            row.push_back(r ? f(*r) : "error");
            any = any || (r && !row.back().empty());
        }
        if (any) rows.push_back(row);
    };
    stat_row("Observations", [](const RegressionResult& r) { return std::to_string(r.n); });
    stat_row("R2", [](const RegressionResult& r) { return r.r2 ? fixed3(*r.r2) : std::string(); });
    stat_row("Adjusted R2", [](const RegressionResult& r) { return r.adj_r2 ? fixed3(*r.adj_r2) : std::string(); });
    stat_row("Within R2", [](const RegressionResult& r) { return r.within_r2 ? fixed3(*r.within_r2) : std::string(); });
    stat_row("Pseudo R2", [](const RegressionResult& r) { return r.pseudo_r2 ? fixed3(*r.pseudo_r2) : std::string(); });
    stat_row("BIC", [](const RegressionResult& r) { return r.bic ? fixed3(*r.bic) : std::string(); });

    std::vector<std::size_t> width(columns.size() + 1, 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    out << title << '\n';
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    const std::string rule(total, '-');
    out << rule << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string line;
        for (std::size_t c = 0; c < rows[i].size() && c < width.size(); ++c) line += pad(rows[i][c], width[c] + 2);
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
        if (i == 0) out << rule << '\n';
    }
    out << rule << '\n';
    out << "* p<0.1, ** p<0.05, *** p<0.01\n";
    return out.str();
}

namespace {

struct Job {
    std::string table;
    int column = 0;
    std::string estimator;  // ols | logit | 2sls
    ModelSpec spec;
    const DataTable* data = nullptr;
    std::string endogenous;
    std::string instrument;
    // Filled by run().
    std::optional<RegressionResult> result;
    std::optional<IvResult> iv;
    std::string error_code;
    std::string error_message;
};

struct TableDef {
    std::string id;
    std::string title;
    std::vector<std::size_t> jobs;
    std::vector<std::pair<std::string, std::vector<std::string>>> extra_rows;
};

Term log_of(const std::string& c) { return {c, {Transform::Log}}; }

void run_job(Job& j) {
    try {
        if (j.estimator == "ols") j.result = ols(j.spec, *j.data);
        else if (j.estimator == "logit") j.result = logit(j.spec, *j.data);
        else {
            j.iv = tsls(j.spec, j.endogenous, j.instrument, *j.data);
            j.result = j.iv->second_stage;
        }
    } catch (const Error& e) {
        j.error_code = std::string(to_string(e.code()));
        j.error_message = e.what();
    }
}

}  // namespace

ResultBundle run_model_grid(const DataTable* countries, const DataTable* entry, const DataTable* exit,
                              const ModelGridConfig& cfg) {
    std::vector<Job> jobs;
    std::vector<TableDef> tables;

    if (countries) {
        const std::vector<std::vector<std::string>> eci_sets = {
            {cfg.eci_software},
            {cfg.eci_trade},
            {cfg.eci_tech},
            {cfg.eci_research},
            {cfg.eci_software, cfg.eci_trade},
            {cfg.eci_software, cfg.eci_tech},
            {cfg.eci_software, cfg.eci_research},
            {cfg.eci_software, cfg.eci_trade, cfg.eci_tech, cfg.eci_research}};
        struct Macro {
            std::string id, iv_id, title;
            Term outcome;
            std::vector<Term> controls;
        };
        const Term log_gdp = log_of(cfg.gdp_pc);
        const Term log_gdp_sq{cfg.gdp_pc, {Transform::Log, Transform::Square}};
        const Term log_pop = log_of(cfg.population);
        const Term log_nr = log_of(cfg.natural_resources);
        const std::vector<Macro> macros = {
            {"table1", "tableS2", "GDP per capita (log)", log_gdp, {log_pop, log_nr}},
            {"table2", "tableS3", "Gini coefficient", {cfg.gini, {}}, {log_gdp, log_gdp_sq, log_pop, log_nr}},
            {"table3", "tableS4", "Emissions per GDP", {cfg.emissions, {}}, {log_gdp, log_pop, log_nr}}};
        for (const auto& m : macros) {
            TableDef t{m.id, m.title + " on ECI (OLS)", {}, {}};
            TableDef tiv{m.iv_id, m.title + " on ECI (2SLS, ECI software instrumented)", {}, {}};
            for (std::size_t c = 0; c < eci_sets.size(); ++c) {
                Job j;
                j.table = m.id;
                j.column = static_cast<int>(c + 1);
                j.estimator = "ols";
                j.spec.name = m.id + "_col" + std::to_string(c + 1);
                j.spec.outcome = m.outcome;
                for (const auto& e : eci_sets[c]) j.spec.covariates.push_back({e, {}});
                for (const auto& ctl : m.controls) j.spec.covariates.push_back(ctl);
                j.spec.se.type = cfg.macro_se == SeType::Clustered ? SeType::Robust : cfg.macro_se;
                j.data = countries;
                t.jobs.push_back(jobs.size());
                jobs.push_back(j);
                if (cfg.include_iv && eci_sets[c].front() == cfg.eci_software) {
                    j.table = m.iv_id;
                    j.estimator = "2sls";
                    j.spec.name = m.iv_id + "_col" + std::to_string(c + 1);
                    j.endogenous = cfg.eci_software;
                    j.instrument = cfg.eci_software_iv;
                    tiv.jobs.push_back(jobs.size());
                    jobs.push_back(j);
                }
            }
            tables.push_back(t);
            if (cfg.include_iv) tables.push_back(tiv);
        }
    }

    struct Transition {
        std::string id, logit_id, title;
        const DataTable* data;
    };
    std::vector<Transition> trans;
    if (entry) trans.push_back({"table4", "tableS5", "Entry", entry});
    if (exit) trans.push_back({"table5", "tableS6", "Exit", exit});
    struct Column {
        std::vector<std::string> covs;
        bool country_fe, language_fe;
    };
    const std::vector<Column> cols = {{{"density"}, false, false},
                                      {{"density"}, true, false},
                                      {{"density"}, false, true},
                                      {{"density"}, true, true},
                                      {{"ubiquity"}, false, false},
                                      {{"density", "ubiquity"}, false, false},
                                      {{"density", "ubiquity"}, true, false}};
    for (const auto& tr : trans) {
        for (const auto& [id, est] : std::vector<std::pair<std::string, std::string>>{{tr.id, "ols"}, {tr.logit_id, "logit"}}) {
            if (est == "logit" && !cfg.include_logit) continue;
            TableDef t{id, tr.title + (est == "ols" ? " (linear probability model)" : " (logit)"), {}, {}};
            std::vector<std::string> cfe, lfe;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                Job j;
                j.table = id;
                j.column = static_cast<int>(c + 1);
                j.estimator = est;
                j.spec.name = id + "_col" + std::to_string(c + 1);
                j.spec.outcome = {"outcome", {}};
                for (const auto& v : cols[c].covs) j.spec.covariates.push_back({v, {}});
                if (cols[c].country_fe) j.spec.fixed_effects.push_back("country");
                if (cols[c].language_fe) j.spec.fixed_effects.push_back("activity");
                j.spec.se.type = cfg.transition_se;
                if (cfg.transition_se == SeType::Clustered) j.spec.se.cluster = "country";
                j.data = tr.data;
                cfe.push_back(cols[c].country_fe ? "Yes" : "No");
                lfe.push_back(cols[c].language_fe ? "Yes" : "No");
                t.jobs.push_back(jobs.size());
                jobs.push_back(j);
            }
            t.extra_rows = {{"Country FE", cfe}, {"Language FE", lfe}};
            tables.push_back(t);
        }
    }

    parallel_for(jobs.size(), [&](std::size_t i) { run_job(jobs[i]); });

    std::map<std::string, std::string> labels = {
        {cfg.eci_software, "ECI software"},
        {cfg.eci_trade, "ECI trade"},
        {cfg.eci_tech, "ECI technology"},
        {cfg.eci_research, "ECI research"},
        {log_of(cfg.gdp_pc).label(), "GDP per capita (log)"},
        {Term{cfg.gdp_pc, {Transform::Log, Transform::Square}}.label(), "GDP per capita (log)^2"},
        {log_of(cfg.population).label(), "Population (log)"},
        {log_of(cfg.natural_resources).label(), "Natural resources (log)"},
        {"density", "Relatedness density"},
        {"ubiquity", "Ubiquity"}};

    ResultBundle out;
    out.json = {{"config", to_json(cfg)}, {"tables", json::array()}};
    for (const auto& t : tables) {
        json tj = {{"id", t.id}, {"title", t.title}, {"columns", json::array()}};
        std::vector<std::string> headers;
        std::vector<const RegressionResult*> results;
        for (auto ji : t.jobs) {
            const auto& j = jobs[ji];
            json cj = {{"column", j.column}, {"estimator", j.estimator}, {"spec", to_json(j.spec)}};
            if (j.iv) {
                cj["result"] = to_json(*j.result);
                cj["iv"] = to_json(*j.iv);
                cj["iv"].erase("second_stage");
            } else if (j.result) {
                cj["result"] = to_json(*j.result);
            } else {
                cj["error"] = {{"code", j.error_code}, {"message", j.error_message}};
            }
            tj["columns"].push_back(cj);
            headers.push_back("(" + std::to_string(j.column) + ")");
            results.push_back(j.result ? &*j.result : nullptr);
        }
        auto extra = t.extra_rows;
        bool any_iv = false;
        for (auto ji : t.jobs) any_iv = any_iv || jobs[ji].iv.has_value();
        if (any_iv) {
            std::vector<std::string> f, dwh;
            for (auto ji : t.jobs) {
                const auto& iv = jobs[ji].iv;
                f.push_back(iv ? fixed3(iv->weak_instrument_f) : "");
                dwh.push_back(iv ? fixed3(iv->dwh_p) : "");
            }
            extra.emplace_back("First-stage F", f);
            extra.emplace_back("DWH p-value", dwh);
        }
        out.text += format_text_table(t.id + ": " + t.title, headers, results, extra, labels);
        for (auto ji : t.jobs)
            if (!jobs[ji].result)
                out.text += "  (" + std::to_string(jobs[ji].column) + ") " + jobs[ji].error_message + "\n";
        out.text += "\n";
        out.json["tables"].push_back(tj);
    }
    return out;
}

}  // namespace eclab::econometrics
