#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/matrix_io.hpp"
#include "econometrics/data_table.hpp"
#include "pipeline/digest.hpp"
#include "relatedness/relatedness.hpp"
#include "specialization/specialization.hpp"

namespace eclab::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), std::string("stage '") + name + "': " + e.detail());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Internal, std::string("stage '") + name + "': " + e.what());
    }
}

// Artifacts are written to a staging directory and moved into place at the end.
class Staging {
public:
    explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / ".eclab-staging") {
        created_out_ = !fs::exists(out_);
        std::error_code ec;
        fs::remove_all(dir_, ec);
        fs::create_directories(dir_, ec);
        if (ec) fail(ErrorCode::Io, "cannot create staging directory " + dir_.string() + ": " + ec.message());
    }

    ~Staging() {
        if (committed_) return;
        std::error_code ec;
        fs::remove_all(dir_, ec);
        if (created_out_ && fs::is_empty(out_, ec)) fs::remove(out_, ec);
    }

    void write(const std::string& name, const std::string& content) {
        csv::write_text(dir_ / name, content);
        digests_[name] = sha256_hex(content);
    }

    const std::map<std::string, std::string>& digests() const { return digests_; }

    void commit() {
        for (const auto& [name, digest] : digests_) {
            std::error_code ec;
            fs::rename(dir_ / name, out_ / name, ec);
            if (ec) fail(ErrorCode::Io, "cannot move " + name + " into " + out_.string() + ": " + ec.message());
        }
        std::error_code ec;
        fs::remove_all(dir_, ec);
        committed_ = true;
    }

private:
    fs::path out_;
    fs::path dir_;
    bool created_out_ = false;
    bool committed_ = false;
    std::map<std::string, std::string> digests_;
};

std::string nested_order_csv(const specialization::NestedOrder& n, const specialization::SpecializationMatrix& m) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"axis", "position", "label", "original_index"});
    for (std::size_t i = 0; i < n.row_order.size(); ++i)
        w.row({"country", std::to_string(i), m.countries()[n.row_order[i]], std::to_string(n.row_order[i])});
    for (std::size_t i = 0; i < n.col_order.size(); ++i)
        w.row({"activity", std::to_string(i), m.activities()[n.col_order[i]], std::to_string(n.col_order[i])});
    return out.str();
}

json complexity_metadata(const complexity::ComplexityScores& s) {
    return {{"method", std::string(complexity::to_string(s.method))},
            {"iterations", s.iterations},
            {"residual", s.residual},
            {"second_eigenvalue", s.second_eigenvalue ? json(*s.second_eigenvalue) : json(nullptr)},
            {"warnings", s.warnings}};
}

using Optional = std::optional<double>;

econometrics::DataTable country_table(const complexity::ComplexityScores& scores,
                                      const econometrics::InstrumentResult& iv,
                                      const ingest::CountryIndicators* ind, const std::set<std::string>* keep) {
    Labels countries;
    std::map<std::string, double> eci;
    for (std::size_t i = 0; i < scores.countries.size(); ++i) {
        eci[scores.countries[i]] = scores.eci_z[i];
        if (!keep || keep->count(scores.countries[i])) countries.push_back(scores.countries[i]);
    }
    std::sort(countries.begin(), countries.end());

    econometrics::DataTable t;
    t.add_column("country", countries);
    std::vector<Optional> e, z;
    for (const auto& c : countries) {
        e.push_back(eci[c]);
        auto it = iv.values.find(c);
        z.push_back(it != iv.values.end() ? Optional(it->second) : std::nullopt);
    }
    t.add_numeric("eci_software", e);
    t.add_numeric("eci_software_iv", z);
    if (!ind) return t;

    using Record = ingest::CountryIndicators::Record;
    const std::vector<std::pair<std::string, Optional Record::*>> fields = {
        {"gdp_pc", &Record::gdp_pc},
        {"population", &Record::population},
        {"natural_resources", &Record::natural_resources},
        {"gini_avg", &Record::gini_avg},
        {"emissions_per_gdp", &Record::emissions_per_gdp},
        {"exports_usd", &Record::exports_usd},
        {"patents", &Record::patents},
        {"eci_trade", &Record::eci_trade},
        {"eci_tech", &Record::eci_tech},
        {"eci_research", &Record::eci_research}};
    for (const auto& [name, member] : fields) {
        std::vector<Optional> col;
        for (const auto& c : countries) {
            auto it = ind->countries.find(c);
            col.push_back(it != ind->countries.end() ? it->second.*member : std::nullopt);
        }
        t.add_numeric(name, col);
    }
    return t;
}

std::string correlation_json(const dynamics::CorrelationReport& r) {
    json j = {{"n", r.n},
              {"pearson_r", r.pearson_r},
              {"pearson_p", r.pearson_p},
              {"spearman_rho", r.spearman_rho},
              {"spearman_p", r.spearman_p},
              {"unmatched_activities", r.unmatched_activities},
              {"unmatched_external", r.unmatched_external}};
    return j.dump(2) + "\n";
}

json library_versions() {
    return {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                          std::to_string(BOOST_VERSION % 100)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"tomlplusplus", toml_library_version()},
            {"openssl", OPENSSL_VERSION_TEXT}};
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult result;
    json manifest;
    Staging out(cfg.output_dir);

    // Cleaning.
    ingest::CleaningReport report;
    const auto yearly = stage("clean", [&] {
        const auto exclusions =
            cfg.exclusions ? ingest::load_exclusions(*cfg.exclusions) : ingest::default_exclusions();
        const auto q = ingest::parse_ghig(cfg.languages, cfg.columns);
        auto y = ingest::clean_filter_aggregate(q, exclusions, cfg.top_n, &report);
        manifest["cleaning"] = {{"quarterly_rows", q.rows.size()},
                                {"dropped_blank_rows", q.dropped_rows},
                                {"exclusions", exclusions},
                                {"excluded_languages", report.excluded_languages},
                                {"dropped_languages", report.dropped_languages},
                                {"kept_languages", report.kept_languages.size()}};
        out.write("counts_yearly.csv", ingest::yearly_to_csv(y));
        return y;
    });

    // Specialization.
    const auto m = stage("specialization", [&] {
        const auto counts = specialization::build_count_matrix(yearly, cfg.year);
        const auto r = specialization::rca(counts);
        auto mm = specialization::binarize(r, cfg.rca_threshold);
        out.write("rca.csv", to_wide_csv(specialization::to_labeled(r), "country"));
        out.write("m.csv", to_wide_csv(specialization::to_labeled(mm), "country"));
        const auto nested = specialization::nested_sort(mm);
        out.write("nested_matrix.csv", to_wide_csv(specialization::to_labeled(nested.matrix), "country"));
        out.write("nested_order.csv", nested_order_csv(nested, mm));
        manifest["specialization"] = {{"countries", mm.n_countries()},
                                      {"activities", mm.n_activities()},
                                      {"dropped_countries", counts.dropped_countries},
                                      {"dropped_activities", counts.dropped_activities}};
        return mm;
    });

    // Complexity.
    const auto scores = stage("complexity", [&] {
        auto s = complexity::compute_complexity(m, cfg.method);
        out.write("eci.csv", complexity::scores_to_csv(s.countries, s.eci_raw, s.eci_z));
        out.write("pci.csv", complexity::scores_to_csv(s.activities, s.pci_raw, s.pci_z));
        manifest["complexity"] = complexity_metadata(s);
        for (const auto& w : s.warnings) result.warnings.push_back("complexity: " + w);
        return s;
    });

    // Relatedness.
    const relatedness::DensityOptions dopts{cfg.density_include_self};
    stage("relatedness", [&] {
        const auto phi = relatedness::proximity(m);
        const auto omega = relatedness::relatedness_density(m, phi, dopts);
        const auto bb = relatedness::backbone(phi, cfg.backbone_threshold);
        out.write("phi.csv", relatedness::proximity_to_long_csv(phi));
        out.write("density.csv", to_wide_csv(relatedness::to_labeled(omega), "country"));
        out.write("backbone.csv", relatedness::backbone_to_csv(bb));
        out.write("backbone.dot", relatedness::backbone_to_dot(bb));
        manifest["backbone"] = {{"edges", bb.edges.size()}, {"components", bb.components}, {"disconnected", bb.disconnected}};
        if (bb.disconnected) result.warnings.push_back("relatedness: backbone is a spanning forest");
        return 0;
    });

    // Dynamics.
    dynamics::TransitionDataset entry, exit;
    stage("dynamics", [&] {
        std::set<int> ys(cfg.window.base.begin(), cfg.window.base.end());
        ys.insert(cfg.window.post.begin(), cfg.window.post.end());
        const auto panel = dynamics::build_panel(yearly, {ys.begin(), ys.end()}, cfg.rca_threshold);
        const auto events = dynamics::detect_events(panel, cfg.window);
        const auto base = dynamics::base_measures(panel, cfg.window.base.front(), dopts);
        dynamics::TransitionOptions topt;
        topt.at_risk = cfg.at_risk;
        topt.ubiquity = cfg.ubiquity;
        topt.type = dynamics::EventType::Entry;
        entry = dynamics::build_transition_dataset(panel, events, base, topt);
        topt.type = dynamics::EventType::Exit;
        exit = dynamics::build_transition_dataset(panel, events, base, topt);
        out.write("events.csv", dynamics::events_to_csv(events));
        out.write("transitions_entry.csv", dynamics::transitions_to_csv(entry));
        out.write("transitions_exit.csv", dynamics::transitions_to_csv(exit));
        std::size_t n_entry = 0, n_exit = 0;
        for (const auto& r : entry.rows) n_entry += static_cast<std::size_t>(r.outcome);
        for (const auto& r : exit.rows) n_exit += static_cast<std::size_t>(r.outcome);
        manifest["dynamics"] = {{"panel_years", panel.years},
                                {"panel_flags", panel.flags},
                                {"base_year", base.year},
                                {"entry_at_risk", entry.rows.size()},
                                {"entry_events", n_entry},
                                {"entry_skipped_absent", entry.skipped_absent},
                                {"exit_at_risk", exit.rows.size()},
                                {"exit_events", n_exit},
                                {"exit_skipped_absent", exit.skipped_absent}};
        for (const auto& f : panel.flags) result.warnings.push_back("dynamics: " + f);
        if (cfg.external_scores) {
            const auto ext = dynamics::load_external_scores(*cfg.external_scores);
            const auto corr = dynamics::correlate_ubiquity_external(m.activities(), m.ubiquity(), ext);
            out.write("correlation.json", correlation_json(corr));
        }
        return 0;
    });

    // Regressions.
    stage("econometrics", [&] {
        ingest::NeighborGraph graph;
        if (cfg.adjacency) graph = ingest::load_adjacency(*cfg.adjacency);
        else result.warnings.push_back("econometrics: no adjacency file, instrument peers are not border-restricted");
        const auto iv = econometrics::build_similarity_instrument(scores, m, graph, cfg.instrument_peers);

        std::optional<ingest::CountryIndicators> ind;
        std::optional<std::set<std::string>> keep;
        json sample = {{"enabled", cfg.sample_filter && cfg.indicators.has_value()}};
        if (cfg.indicators) {
            ind = ingest::load_indicators(*cfg.indicators);
            if (cfg.sample_filter) {
                auto sel = ingest::apply_sample_filters(*ind, cfg.sample);
                json excluded = json::array();
                for (const auto& [c, why] : sel.excluded) excluded.push_back({{"country", c}, {"reason", why}});
                for (const auto& c : scores.countries)
                    if (!ind->countries.count(c)) excluded.push_back({{"country", c}, {"reason", "no indicators"}});
                sample["excluded"] = excluded;
                keep = std::move(sel.included);
            }
        }
        const auto countries = country_table(scores, iv, ind ? &*ind : nullptr, keep ? &*keep : nullptr);
        sample["countries"] = countries.rows();
        manifest["sample"] = sample;
        out.write("countries.csv", countries.to_csv());

        const auto entry_t = econometrics::DataTable::parse(dynamics::transitions_to_csv(entry), "transitions_entry");
        const auto exit_t = econometrics::DataTable::parse(dynamics::transitions_to_csv(exit), "transitions_exit");
        econometrics::ModelGridConfig pm;
        pm.macro_se = cfg.macro_se;
        pm.transition_se = cfg.transition_se;
        pm.include_iv = cfg.include_iv;
        pm.include_logit = cfg.include_logit;
        auto bundle = econometrics::run_model_grid(ind ? &countries : nullptr, &entry_t, &exit_t, pm);
        json peers = json::object();
        for (const auto& [c, p] : iv.peers) peers[c] = p;
        bundle.json["instrument"] = {{"peers_k", cfg.instrument_peers}, {"peers", peers}, {"dropped", iv.dropped}};
        if (!ind) result.warnings.push_back("econometrics: no indicators file, macro tables skipped");
        out.write("results.json", bundle.json.dump(2) + "\n");
        out.write("results.txt", bundle.text);
        return 0;
    });

    // Manifest.
    const auto config = effective_config(cfg);
    manifest["tool"] = "eclab";
    manifest["version"] = ECLAB_VERSION;
    manifest["libraries"] = library_versions();
    manifest["config"] = config;
    manifest["config_sha256"] = sha256_hex(config.dump());
    json inputs = json::object();
    auto add_input = [&](const char* field, const std::optional<fs::path>& p) {
        if (p) inputs[field] = {{"file", p->filename().string()}, {"sha256", sha256_file(*p)}};
    };
    add_input("languages", cfg.languages);
    add_input("exclusions", cfg.exclusions);
    add_input("indicators", cfg.indicators);
    add_input("adjacency", cfg.adjacency);
    add_input("external_scores", cfg.external_scores);
    manifest["inputs"] = inputs;
    manifest["knobs"] = {
        {"language_rank", "mean developers over all periods in the file, absent periods counted as zero"},
        {"yearly_aggregation", "mean over quarters present"},
        {"rca_threshold", cfg.rca_threshold},
        {"rca_inclusive", true},
        {"complexity_method", std::string(complexity::to_string(cfg.method))},
        {"complexity_tolerance", complexity::FixedPointOptions{}.tol},
        {"complexity_max_iter", complexity::FixedPointOptions{}.max_iter},
        {"repeated_eigenvalue_tolerance", complexity::EigenOptions{}.repeated_tol},
        {"eci_sign", "positive correlation with diversity"},
        {"standardization", "population standard deviation"},
        {"density_include_self", cfg.density_include_self},
        {"density_scale", "raw"},
        {"backbone_threshold", cfg.backbone_threshold},
        {"window", cfg.window.describe()},
        {"relatedness_year", cfg.window.base.front()},
        {"at_risk", std::string(dynamics::to_string(cfg.at_risk))},
        {"ubiquity_transform", std::string(dynamics::to_string(cfg.ubiquity))},
        {"instrument_peers", cfg.instrument_peers},
        {"instrument_similarity", "co-specialization / max(diversity)"},
        {"robust_se", "HC1"},
        {"cluster_se_linear", "CR1: G/(G-1) * (N-1)/(N-K)"},
        {"cluster_se_logit", "G/(G-1)"},
        {"robust_se_logit", "N/(N-1)"},
        {"clustered_df", "G-1"},
        {"logit_max_iter", econometrics::LogitOptions{}.max_iter},
        {"logit_tolerance", econometrics::LogitOptions{}.tol},
        {"logit_fe", "dummy variables; groups without outcome variation dropped"},
        {"weak_instrument_threshold", 10.0},
        {"significance", "* p<0.1, ** p<0.05, *** p<0.01"}};
    manifest["warnings"] = result.warnings;
    json artifacts = json::object();
    for (const auto& [name, digest] : out.digests()) artifacts[name] = digest;
    manifest["artifacts"] = artifacts;
    out.write("manifest.json", manifest.dump(2) + "\n");

    stage("commit", [&] {
        out.commit();
        return 0;
    });
    for (const auto& [name, digest] : out.digests()) result.artifacts.push_back(name);
    result.manifest = std::move(manifest);
    return result;
}

}  // namespace eclab::pipeline
