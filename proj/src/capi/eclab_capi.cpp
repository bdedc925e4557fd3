#include "eclab/eclab.h"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <set>
#include <sstream>
#include <string>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/matrix_io.hpp"
#include "common/parallel.hpp"
#include "complexity/complexity.hpp"
#include "dynamics/dynamics.hpp"
#include "econometrics/econometrics.hpp"
#include "ingest/ingest.hpp"
#include "pipeline/config.hpp"
#include "pipeline/pipeline.hpp"
#include "relatedness/relatedness.hpp"
#include "specialization/specialization.hpp"

struct eclab_matrix {
    eclab::LabeledMatrix m;
};

struct eclab_scores {
    eclab::complexity::ComplexityScores s;
};

namespace {

using namespace eclab;
using nlohmann::json;

thread_local std::string last_error;

eclab_status to_status(ErrorCode c) { return static_cast<eclab_status>(static_cast<int>(c) + 1); }

template <class F>
eclab_status guard(F&& f) noexcept {
    try {
        f();
        return ECLAB_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "Internal: out of memory";
    } catch (const std::exception& e) {
        last_error = std::string("Internal: ") + e.what();
    } catch (...) {
        last_error = "Internal: unknown exception";
    }
    return ECLAB_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

std::string str(const char* s, const char* what) {
    require(s, what);
    return s;
}

std::vector<int> parse_years(const char* s, const char* what) {
    std::vector<int> out;
    std::stringstream ss(str(s, what));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto v = csv::parse_int(tok);
        if (!v) fail(ErrorCode::InvalidArgument, std::string(what) + ": '" + tok + "' is not a year");
        out.push_back(static_cast<int>(*v));
    }
    if (out.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + ": no years given");
    return out;
}

specialization::SpecializationMatrix load_m(const char* path) {
    return specialization::specialization_from_labeled(read_wide_csv(str(path, "m")));
}

dynamics::SpecializationPanel load_panel(const eclab_panel_source* src, const dynamics::WindowSpec& w) {
    require(src, "panel source");
    if ((src->panel_dir != nullptr) == (src->yearly_counts != nullptr))
        fail(ErrorCode::InvalidArgument, "give exactly one of a panel directory or a yearly counts file");
    if (src->panel_dir) return dynamics::load_panel_dir(src->panel_dir);
    std::set<int> ys(w.base.begin(), w.base.end());
    ys.insert(w.post.begin(), w.post.end());
    return dynamics::build_panel(ingest::load_yearly(src->yearly_counts), {ys.begin(), ys.end()}, src->threshold);
}

void write_json(const char* path, const json& j) { csv::write_text(str(path, "json output"), j.dump(2) + "\n"); }

std::vector<econometrics::ModelSpec> load_specs(const char* path) {
    json doc;
    const auto text = csv::read_text(str(path, "spec"));
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Validation, std::string(path) + ": invalid JSON: " + e.what());
    }
    std::vector<econometrics::ModelSpec> out;
    if (doc.is_array()) {
        for (const auto& j : doc) out.push_back(econometrics::model_spec_from_json(j));
    } else {
        out.push_back(econometrics::model_spec_from_json(doc));
    }
    if (out.empty()) fail(ErrorCode::Validation, std::string(path) + ": no model specs");
    return out;
}

std::string text_table(const std::string& title, const std::vector<const econometrics::RegressionResult*>& rs) {
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < rs.size(); ++i) cols.push_back("(" + std::to_string(i + 1) + ")");
    return econometrics::format_text_table(title, cols, rs, {}, {});
}

}  // namespace

extern "C" {

const char* eclab_version(void) { return ECLAB_VERSION; }

const char* eclab_last_error(void) { return last_error.c_str(); }

const char* eclab_status_name(eclab_status status) {
    if (status == ECLAB_OK) return "Ok";
    const int c = static_cast<int>(status) - 1;
    if (c < 0 || c > static_cast<int>(ErrorCode::Internal)) return "Unknown";
    return to_string(static_cast<ErrorCode>(c)).data();
}

int eclab_exit_code(eclab_status status) {
    if (status == ECLAB_OK) return 0;
    const int c = static_cast<int>(status) - 1;
    if (c < 0 || c > static_cast<int>(ErrorCode::Internal)) return 1;
    switch (classify(static_cast<ErrorCode>(c))) {
    case ErrorClass::Validation: return 2;
    case ErrorClass::Data: return 3;
    case ErrorClass::Numerical: return 4;
    case ErrorClass::Internal: return 1;
    }
    return 1;
}

void eclab_set_threads(unsigned n) { set_thread_count(n); }

unsigned eclab_threads(void) { return thread_count(); }

eclab_status eclab_matrix_create(size_t rows, size_t cols, const char* const* row_labels,
                                 const char* const* col_labels, const double* values, eclab_matrix** out) {
    return guard([&] {
        require(out, "out");
        require(row_labels, "row_labels");
        require(col_labels, "col_labels");
        require(values, "values");
        auto h = std::make_unique<eclab_matrix>();
        for (size_t i = 0; i < rows; ++i) h->m.rows.push_back(str(row_labels[i], "row label"));
        for (size_t j = 0; j < cols; ++j) h->m.cols.push_back(str(col_labels[j], "column label"));
        h->m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j)
                h->m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
        *out = h.release();
    });
}

eclab_status eclab_matrix_read_csv(const char* path, eclab_matrix** out) {
    return guard([&] {
        require(out, "out");
        auto h = std::make_unique<eclab_matrix>();
        h->m = read_wide_csv(str(path, "path"));
        *out = h.release();
    });
}

eclab_status eclab_matrix_write_csv(const eclab_matrix* m, const char* path, const char* corner) {
    return guard([&] {
        require(m, "matrix");
        write_wide_csv(str(path, "path"), m->m, corner ? corner : "");
    });
}

size_t eclab_matrix_rows(const eclab_matrix* m) { return m ? m->m.rows.size() : 0; }

size_t eclab_matrix_cols(const eclab_matrix* m) { return m ? m->m.cols.size() : 0; }

double eclab_matrix_get(const eclab_matrix* m, size_t row, size_t col) {
    if (!m || row >= m->m.rows.size() || col >= m->m.cols.size()) return std::numeric_limits<double>::quiet_NaN();
    return m->m.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

const char* eclab_matrix_row_label(const eclab_matrix* m, size_t row) {
    return m && row < m->m.rows.size() ? m->m.rows[row].c_str() : nullptr;
}

const char* eclab_matrix_col_label(const eclab_matrix* m, size_t col) {
    return m && col < m->m.cols.size() ? m->m.cols[col].c_str() : nullptr;
}

void eclab_matrix_free(eclab_matrix* m) { delete m; }

eclab_status eclab_rca(const eclab_matrix* counts, eclab_matrix** out) {
    return guard([&] {
        require(counts, "counts");
        require(out, "out");
        const auto x = specialization::make_count_matrix(counts->m.rows, counts->m.cols, counts->m.values);
        auto h = std::make_unique<eclab_matrix>();
        h->m = specialization::to_labeled(specialization::rca(x));
        *out = h.release();
    });
}

eclab_status eclab_binarize(const eclab_matrix* rca, double threshold, eclab_matrix** out) {
    return guard([&] {
        require(rca, "rca");
        require(out, "out");
        const auto m = specialization::binarize(specialization::rca_from_labeled(rca->m), threshold);
        auto h = std::make_unique<eclab_matrix>();
        h->m = specialization::to_labeled(m);
        *out = h.release();
    });
}

eclab_status eclab_proximity(const eclab_matrix* m, eclab_matrix** out) {
    return guard([&] {
        require(m, "m");
        require(out, "out");
        const auto phi = relatedness::proximity(specialization::specialization_from_labeled(m->m));
        auto h = std::make_unique<eclab_matrix>();
        h->m = {phi.activities, phi.activities, phi.values};
        *out = h.release();
    });
}

eclab_status eclab_density(const eclab_matrix* m, const eclab_matrix* phi, int include_self, eclab_matrix** out) {
    return guard([&] {
        require(m, "m");
        require(phi, "phi");
        require(out, "out");
        if (phi->m.rows != phi->m.cols) fail(ErrorCode::InvalidArgument, "phi row and column labels differ");
        const relatedness::ProximityMatrix p{phi->m.rows, phi->m.values};
        const auto d = relatedness::relatedness_density(specialization::specialization_from_labeled(m->m), p,
                                                        {include_self != 0});
        auto h = std::make_unique<eclab_matrix>();
        h->m = relatedness::to_labeled(d);
        *out = h.release();
    });
}

eclab_status eclab_complexity(const eclab_matrix* m, eclab_method method, eclab_scores** out) {
    return guard([&] {
        require(m, "m");
        require(out, "out");
        auto h = std::make_unique<eclab_scores>();
        h->s = complexity::compute_complexity(
            specialization::specialization_from_labeled(m->m),
            method == ECLAB_METHOD_EIGEN ? complexity::Method::Eigen : complexity::Method::FixedPoint);
        *out = h.release();
    });
}

size_t eclab_scores_countries(const eclab_scores* s) { return s ? s->s.countries.size() : 0; }

size_t eclab_scores_activities(const eclab_scores* s) { return s ? s->s.activities.size() : 0; }

const char* eclab_scores_country(const eclab_scores* s, size_t i) {
    return s && i < s->s.countries.size() ? s->s.countries[i].c_str() : nullptr;
}

const char* eclab_scores_activity(const eclab_scores* s, size_t i) {
    return s && i < s->s.activities.size() ? s->s.activities[i].c_str() : nullptr;
}

double eclab_scores_eci(const eclab_scores* s, size_t i, int standardized) {
    if (!s || i >= s->s.countries.size()) return std::numeric_limits<double>::quiet_NaN();
    return standardized ? s->s.eci_z[i] : s->s.eci_raw[i];
}

double eclab_scores_pci(const eclab_scores* s, size_t i, int standardized) {
    if (!s || i >= s->s.activities.size()) return std::numeric_limits<double>::quiet_NaN();
    return standardized ? s->s.pci_z[i] : s->s.pci_raw[i];
}

int eclab_scores_iterations(const eclab_scores* s) { return s ? s->s.iterations : 0; }

double eclab_scores_residual(const eclab_scores* s) {
    return s ? s->s.residual : std::numeric_limits<double>::quiet_NaN();
}

eclab_status eclab_scores_second_eigenvalue(const eclab_scores* s, double* out) {
    return guard([&] {
        require(s, "scores");
        require(out, "out");
        if (!s->s.second_eigenvalue) fail(ErrorCode::InvalidArgument, "scores were not computed by the eigen path");
        *out = *s->s.second_eigenvalue;
    });
}

void eclab_scores_free(eclab_scores* s) { delete s; }

eclab_status eclab_clean_file(const char* languages, const char* exclusions, int top_n, const char* out) {
    return guard([&] {
        const auto q = ingest::parse_ghig(str(languages, "languages"));
        const auto ex = exclusions ? ingest::load_exclusions(exclusions) : ingest::default_exclusions();
        ingest::write_yearly(str(out, "out"), ingest::clean_filter_aggregate(q, ex, top_n));
    });
}

eclab_status eclab_rca_file(const char* yearly_counts, int year, const char* out) {
    return guard([&] {
        const auto y = ingest::load_yearly(str(yearly_counts, "counts"));
        const auto r = specialization::rca(specialization::build_count_matrix(y, year));
        write_wide_csv(str(out, "out"), specialization::to_labeled(r), "country");
    });
}

eclab_status eclab_m_file(const char* rca, double threshold, const char* out, const char* nested_out,
                          const char* nested_order_out) {
    return guard([&] {
        const auto r = specialization::rca_from_labeled(read_wide_csv(str(rca, "rca")));
        const auto m = specialization::binarize(r, threshold);
        write_wide_csv(str(out, "out"), specialization::to_labeled(m), "country");
        if (nested_out || nested_order_out) {
            const auto n = specialization::nested_sort(m);
            if (nested_out) write_wide_csv(nested_out, specialization::to_labeled(n.matrix), "country");
            if (nested_order_out) {
                std::ostringstream o;
                csv::Writer w(o);
                w.row({"axis", "position", "label", "original_index"});
                for (std::size_t i = 0; i < n.row_order.size(); ++i)
                    w.row({"country", std::to_string(i), m.countries()[n.row_order[i]], std::to_string(n.row_order[i])});
                for (std::size_t i = 0; i < n.col_order.size(); ++i)
                    w.row({"activity", std::to_string(i), m.activities()[n.col_order[i]],
                           std::to_string(n.col_order[i])});
                csv::write_text(nested_order_out, o.str());
            }
        }
    });
}

eclab_status eclab_complexity_file(const char* m, eclab_method method, const char* eci_out, const char* pci_out,
                                   const char* meta_out) {
    return guard([&] {
        const auto mm = load_m(m);
        const auto s = complexity::compute_complexity(
            mm, method == ECLAB_METHOD_EIGEN ? complexity::Method::Eigen : complexity::Method::FixedPoint);
        csv::write_text(str(eci_out, "eci_out"), complexity::scores_to_csv(s.countries, s.eci_raw, s.eci_z));
        if (pci_out) csv::write_text(pci_out, complexity::scores_to_csv(s.activities, s.pci_raw, s.pci_z));
        if (meta_out) {
            json meta = {{"method", std::string(complexity::to_string(s.method))},
                         {"iterations", s.iterations},
                         {"residual", s.residual},
                         {"second_eigenvalue", s.second_eigenvalue ? json(*s.second_eigenvalue) : json(nullptr)},
                         {"countries", s.countries.size()},
                         {"activities", s.activities.size()},
                         {"warnings", s.warnings}};
            write_json(meta_out, meta);
        }
    });
}

eclab_status eclab_proximity_file(const char* m, const char* out) {
    return guard([&] {
        csv::write_text(str(out, "out"), relatedness::proximity_to_long_csv(relatedness::proximity(load_m(m))));
    });
}

eclab_status eclab_density_file(const char* m, const char* phi, int include_self, const char* out) {
    return guard([&] {
        const auto mm = load_m(m);
        const auto p = phi ? relatedness::proximity_from_long_csv(csv::read_text(phi), phi) : relatedness::proximity(mm);
        const auto d = relatedness::relatedness_density(mm, p, {include_self != 0});
        write_wide_csv(str(out, "out"), relatedness::to_labeled(d), "country");
    });
}

eclab_status eclab_backbone_file(const char* phi, double threshold, const char* edges_out, const char* dot_out) {
    return guard([&] {
        const auto p = relatedness::proximity_from_long_csv(csv::read_text(str(phi, "phi")), phi);
        const auto b = relatedness::backbone(p, threshold);
        csv::write_text(str(edges_out, "edges_out"), relatedness::backbone_to_csv(b));
        if (dot_out) csv::write_text(dot_out, relatedness::backbone_to_dot(b));
    });
}

eclab_status eclab_events_file(const eclab_panel_source* src, const char* base, const char* post, const char* out) {
    return guard([&] {
        const dynamics::WindowSpec w{parse_years(base, "base"), parse_years(post, "post")};
        const auto panel = load_panel(src, w);
        csv::write_text(str(out, "out"), dynamics::events_to_csv(dynamics::detect_events(panel, w)));
    });
}

eclab_status eclab_transitions_file(const eclab_panel_source* src, const char* base, const char* post,
                                    const char* type, const char* at_risk, const char* ubiquity, int include_self,
                                    const char* out) {
    return guard([&] {
        const dynamics::WindowSpec w{parse_years(base, "base"), parse_years(post, "post")};
        dynamics::TransitionOptions opts;
        opts.type = dynamics::parse_event_type(str(type, "type"));
        if (at_risk) opts.at_risk = dynamics::parse_at_risk(at_risk);
        if (ubiquity) opts.ubiquity = dynamics::parse_ubiquity_transform(ubiquity);
        const auto panel = load_panel(src, w);
        const auto events = dynamics::detect_events(panel, w);
        const auto bm = dynamics::base_measures(panel, w.base.front(), {include_self != 0});
        const auto ds = dynamics::build_transition_dataset(panel, events, bm, opts);
        csv::write_text(str(out, "out"), dynamics::transitions_to_csv(ds));
    });
}

eclab_status eclab_regress_file(const char* spec, const char* data, const char* estimator, const char* json_out,
                                const char* text_out) {
    return guard([&] {
        const auto specs = load_specs(spec);
        const auto table = econometrics::DataTable::load(str(data, "data"));
        const std::string est = estimator ? estimator : "ols";
        if (est != "ols" && est != "logit")
            fail(ErrorCode::InvalidArgument, "estimator must be ols or logit, got '" + est + "'");
        std::vector<econometrics::RegressionResult> results;
        for (const auto& s : specs)
            results.push_back(est == "ols" ? econometrics::ols(s, table) : econometrics::logit(s, table));
        json models = json::array();
        std::vector<const econometrics::RegressionResult*> ptrs;
        for (std::size_t i = 0; i < results.size(); ++i) {
            models.push_back({{"spec", econometrics::to_json(specs[i])}, {"result", econometrics::to_json(results[i])}});
            ptrs.push_back(&results[i]);
        }
        write_json(json_out, {{"models", models}});
        if (text_out) csv::write_text(text_out, text_table(est == "ols" ? "OLS" : "Logit", ptrs));
    });
}

eclab_status eclab_iv_file(const char* spec, const char* data, const char* endogenous, const char* instrument,
                           const char* json_out, const char* text_out) {
    return guard([&] {
        const auto specs = load_specs(spec);
        const auto table = econometrics::DataTable::load(str(data, "data"));
        std::vector<econometrics::IvResult> results;
        for (const auto& s : specs)
            results.push_back(econometrics::tsls(s, str(endogenous, "endogenous"), str(instrument, "instrument"), table));
        json models = json::array();
        std::vector<const econometrics::RegressionResult*> ptrs;
        for (std::size_t i = 0; i < results.size(); ++i) {
            models.push_back({{"spec", econometrics::to_json(specs[i])}, {"result", econometrics::to_json(results[i])}});
            ptrs.push_back(&results[i].second_stage);
        }
        write_json(json_out, {{"models", models}});
        if (text_out) {
            auto text = text_table("2SLS", ptrs);
            for (std::size_t i = 0; i < results.size(); ++i) {
                std::ostringstream o;
                o << "(" << i + 1 << ") first-stage F = " << results[i].weak_instrument_f
                  << ", DWH p = " << results[i].dwh_p
                  << (results[i].weak_instrument_warning ? "  [weak instrument]" : "") << "\n";
                text += o.str();
            }
            csv::write_text(text_out, text);
        }
    });
}

eclab_status eclab_correlate_file(const char* m, const char* external_scores, const char* json_out) {
    return guard([&] {
        const auto mm = load_m(m);
        const auto ext = dynamics::load_external_scores(str(external_scores, "external_scores"));
        const auto r = dynamics::correlate_ubiquity_external(mm.activities(), mm.ubiquity(), ext);
        write_json(json_out, {{"n", r.n},
                              {"pearson_r", r.pearson_r},
                              {"pearson_p", r.pearson_p},
                              {"spearman_rho", r.spearman_rho},
                              {"spearman_p", r.spearman_p},
                              {"unmatched_activities", r.unmatched_activities},
                              {"unmatched_external", r.unmatched_external}});
    });
}

eclab_status eclab_rank_file(const char* eci, const char* indicators, int sample_filter, const char* out) {
    return guard([&] {
        const auto t = econometrics::DataTable::load(str(eci, "eci"));
        const auto ce = t.column("entity"), cz = t.column("z");
        std::optional<ingest::CountryIndicators> ind;
        if (indicators) ind = ingest::load_indicators(indicators);
        if (sample_filter && !ind) fail(ErrorCode::InvalidArgument, "sample filtering needs an indicators file");
        std::optional<ingest::SampleSelection> sel;
        if (sample_filter) sel = ingest::apply_sample_filters(*ind);

        Labels countries;
        std::vector<double> sw;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const auto& c = t.text(ce, r);
            auto v = t.number(cz, r);
            if (!v || (sel && !sel->included.count(c))) continue;
            countries.push_back(c);
            sw.push_back(*v);
        }
        using Record = ingest::CountryIndicators::Record;
        const std::vector<std::pair<std::string, std::optional<double> Record::*>> ext = {
            {"trade", &Record::eci_trade}, {"tech", &Record::eci_tech}, {"research", &Record::eci_research}};

        std::vector<std::string> header = {"rank", "country", "eci_software"};
        std::vector<std::vector<std::optional<double>>> ext_vals;
        std::vector<std::map<std::string, int>> ext_rank;
        if (ind)
            for (const auto& [name, member] : ext) {
                header.push_back("eci_" + name);
                header.push_back("rank_" + name);
                std::vector<std::optional<double>> vals;
                Labels have;
                std::vector<double> hv;
                for (const auto& c : countries) {
                    auto it = ind->countries.find(c);
                    auto v = it != ind->countries.end() ? it->second.*member : std::nullopt;
                    vals.push_back(v);
                    if (v) {
                        have.push_back(c);
                        hv.push_back(*v);
                    }
                }
                std::map<std::string, int> ranks;
                for (const auto& e : complexity::rank_table(have, hv)) ranks[e.label] = e.rank;
                ext_vals.push_back(vals);
                ext_rank.push_back(ranks);
            }

        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < countries.size(); ++i) pos[countries[i]] = i;
        std::ostringstream o;
        csv::Writer w(o);
        w.row(header);
        for (const auto& e : complexity::rank_table(countries, sw)) {
            std::vector<std::string> row = {std::to_string(e.rank), e.label, csv::format_double(e.value)};
            const auto i = pos[e.label];
            for (std::size_t k = 0; k < ext_vals.size(); ++k) {
                const auto& v = ext_vals[k][i];
                row.push_back(v ? csv::format_double(*v) : "");
                row.push_back(v ? std::to_string(ext_rank[k][e.label]) : "");
            }
            w.row(row);
        }
        csv::write_text(str(out, "out"), o.str());
    });
}

eclab_status eclab_pipeline_run(const char* config_path, const char* overrides_json) {
    return guard([&] {
        json overrides = json::object();
        if (overrides_json) {
            try {
                overrides = json::parse(overrides_json);
            } catch (const json::parse_error& e) {
                fail(ErrorCode::Validation, std::string("overrides: invalid JSON: ") + e.what());
            }
        }
        const auto cfg = pipeline::load_config(str(config_path, "config"), overrides);
        pipeline::run_pipeline(cfg);
    });
}

}  // extern "C"
