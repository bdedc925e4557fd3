#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "eclab/eclab.h"

namespace {

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int report(eclab_status st) {
    if (st != ECLAB_OK) std::fprintf(stderr, "eclab: %s\n", eclab_last_error());
    return eclab_exit_code(st);
}

std::string absolute(const std::string& p) { return std::filesystem::absolute(p).lexically_normal().string(); }

struct PanelArgs {
    std::string panel_dir;
    std::string counts;
    double threshold = 1.0;
    std::string base = "2020,2021";
    std::string post = "2022,2023";

    void add(CLI::App* app) {
        auto* dir = app->add_option("--panel-dir", panel_dir, "Directory of m_<year>.csv (+ counts_<year>.csv)");
        auto* cnt = app->add_option("--counts", counts, "Yearly counts file to binarize instead of a panel directory");
        dir->excludes(cnt);
        app->add_option("--threshold", threshold, "RCA threshold when building from --counts")->capture_default_str();
        app->add_option("--base", base, "Base-window years")->capture_default_str();
        app->add_option("--post", post, "Post-window years")->capture_default_str();
    }

    eclab_panel_source source() const { return {opt(panel_dir), opt(counts), threshold}; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eclab: economic complexity of software specialization"};
    app.require_subcommand(1);
    unsigned threads = 1;
    std::optional<long long> seed;
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency); results do not depend on it")
        ->capture_default_str();
    app.add_option("--seed", seed, "Accepted for forward compatibility; no command is stochastic");
    app.add_flag_callback("--version", [] {
        std::printf("eclab %s\n", eclab_version());
        throw CLI::Success();
    });

    std::function<eclab_status()> run;

    // clean
    {
        auto* c = app.add_subcommand("clean", "Exclude, rank and aggregate GHIG quarterly language counts");
        static std::string languages, exclusions, out;
        static int top_n = 150;
        c->add_option("--languages", languages, "GHIG languages.csv")->required()->check(CLI::ExistingFile);
        c->add_option("--exclusions", exclusions, "Exclusion list, one language per line")->check(CLI::ExistingFile);
        c->add_option("--top-n", top_n, "Languages kept")->capture_default_str()->check(CLI::PositiveNumber);
        c->add_option("--out", out, "Yearly counts CSV")->required();
        c->callback([&] { run = [] { return eclab_clean_file(languages.c_str(), opt(exclusions), top_n, out.c_str()); }; });
    }
    // rca
    {
        auto* c = app.add_subcommand("rca", "Revealed comparative advantage for one year");
        static std::string counts, out;
        static int year = 2020;
        c->add_option("--counts", counts, "Yearly counts CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--year", year, "Year")->capture_default_str();
        c->add_option("--out", out, "RCA matrix CSV")->required();
        c->callback([&] { run = [] { return eclab_rca_file(counts.c_str(), year, out.c_str()); }; });
    }
    // m
    {
        auto* c = app.add_subcommand("m", "Binarize RCA into the specialization matrix");
        static std::string rca, out, nested, order;
        static double threshold = 1.0;
        c->add_option("--rca", rca, "RCA matrix CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--threshold", threshold, "M = 1 iff RCA >= threshold")->capture_default_str();
        c->add_option("--out", out, "Specialization matrix CSV")->required();
        c->add_option("--nested-out", nested, "Nested-sorted matrix CSV");
        c->add_option("--nested-order-out", order, "Permutation sidecar CSV");
        c->callback([&] {
            run = [] { return eclab_m_file(rca.c_str(), threshold, out.c_str(), opt(nested), opt(order)); };
        });
    }
    // complexity
    {
        auto* c = app.add_subcommand("complexity", "ECI and PCI");
        static std::string m, method = "eigen", out, pci_out, meta_out;
        c->add_option("--m", m, "Specialization matrix CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--method", method, "eigen | iterate")
            ->capture_default_str()
            ->check(CLI::IsMember({"eigen", "iterate"}));
        c->add_option("--out", out, "ECI CSV (entity,raw,z,rescaled,rank)")->required();
        c->add_option("--pci-out", pci_out, "PCI CSV");
        c->add_option("--meta-out", meta_out, "Run metadata JSON (default: <out>.meta.json)");
        c->callback([&] {
            run = [] {
                const std::string meta = meta_out.empty() ? out + ".meta.json" : meta_out;
                return eclab_complexity_file(m.c_str(), method == "eigen" ? ECLAB_METHOD_EIGEN : ECLAB_METHOD_ITERATE,
                                             out.c_str(), opt(pci_out), meta.c_str());
            };
        });
    }
    // proximity
    {
        auto* c = app.add_subcommand("proximity", "Language proximity (long form l1,l2,phi)");
        static std::string m, out;
        c->add_option("--m", m, "Specialization matrix CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--out", out, "Proximity CSV")->required();
        c->callback([&] { run = [] { return eclab_proximity_file(m.c_str(), out.c_str()); }; });
    }
    // density
    {
        auto* c = app.add_subcommand("density", "Relatedness density");
        static std::string m, phi, out;
        static bool exclude_self = false;
        c->add_option("--m", m, "Specialization matrix CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--phi", phi, "Proximity CSV (computed from --m when absent)")->check(CLI::ExistingFile);
        c->add_flag("--exclude-self", exclude_self, "Drop the l' = l term");
        c->add_option("--out", out, "Density matrix CSV")->required();
        c->callback([&] { run = [] { return eclab_density_file(m.c_str(), opt(phi), exclude_self ? 0 : 1, out.c_str()); }; });
    }
    // backbone
    {
        auto* c = app.add_subcommand("backbone", "Maximum spanning tree plus strong edges");
        static std::string phi, out, dot;
        static double threshold = 0.5;
        c->add_option("--phi", phi, "Proximity CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--threshold", threshold, "Extra edges with phi >= threshold")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 1.0));
        c->add_option("--out", out, "Edge list CSV")->required();
        c->add_option("--dot", dot, "Graphviz DOT file");
        c->callback([&] { run = [] { return eclab_backbone_file(phi.c_str(), threshold, out.c_str(), opt(dot)); }; });
    }
    // events
    {
        auto* c = app.add_subcommand("events", "Entry and exit events between two windows");
        static PanelArgs panel;
        static std::string out;
        panel.add(c);
        c->add_option("--out", out, "Events CSV")->required();
        c->callback([&] {
            run = [] {
                const auto src = panel.source();
                return eclab_events_file(&src, panel.base.c_str(), panel.post.c_str(), out.c_str());
            };
        });
    }
    // transitions
    {
        auto* c = app.add_subcommand("transitions", "At-risk dataset with density and ubiquity");
        static PanelArgs panel;
        static std::string out, type = "entry", at_risk = "nonzero-count", ubiquity = "z";
        static bool exclude_self = false;
        panel.add(c);
        c->add_option("--type", type, "entry | exit")->capture_default_str()->check(CLI::IsMember({"entry", "exit"}));
        c->add_option("--at-risk", at_risk, "none | nonzero-count | rca-positive")
            ->capture_default_str()
            ->check(CLI::IsMember({"none", "nonzero-count", "rca-positive"}));
        c->add_option("--ubiquity", ubiquity, "raw | z | log")
            ->capture_default_str()
            ->check(CLI::IsMember({"raw", "z", "log"}));
        c->add_flag("--exclude-self", exclude_self, "Density without the l' = l term");
        c->add_option("--out", out, "Transitions CSV")->required();
        c->callback([&] {
            run = [] {
                const auto src = panel.source();
                return eclab_transitions_file(&src, panel.base.c_str(), panel.post.c_str(), type.c_str(),
                                              at_risk.c_str(), ubiquity.c_str(), exclude_self ? 0 : 1, out.c_str());
            };
        });
    }
    // regress
    {
        auto* c = app.add_subcommand("regress", "OLS or logit from a JSON model spec");
        static std::string spec, data, estimator = "ols", out, text;
        c->add_option("--spec", spec, "Model spec JSON (object or array)")->required()->check(CLI::ExistingFile);
        c->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--estimator", estimator, "ols | logit")
            ->capture_default_str()
            ->check(CLI::IsMember({"ols", "logit"}));
        c->add_option("--out", out, "Results JSON")->required();
        c->add_option("--text", text, "Formatted table");
        c->callback([&] {
            run = [] { return eclab_regress_file(spec.c_str(), data.c_str(), estimator.c_str(), out.c_str(), opt(text)); };
        });
    }
    // iv
    {
        auto* c = app.add_subcommand("iv", "Two-stage least squares with diagnostics");
        static std::string spec, data, endog = "eci_software", instrument = "eci_software_iv", out, text;
        c->add_option("--spec", spec, "Model spec JSON (object or array)")->required()->check(CLI::ExistingFile);
        c->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--endog", endog, "Endogenous covariate")->capture_default_str();
        c->add_option("--instrument", instrument, "Excluded instrument column")->capture_default_str();
        c->add_option("--out", out, "Results JSON")->required();
        c->add_option("--text", text, "Formatted table");
        c->callback([&] {
            run = [] {
                return eclab_iv_file(spec.c_str(), data.c_str(), endog.c_str(), instrument.c_str(), out.c_str(), opt(text));
            };
        });
    }
    // correlate
    {
        auto* c = app.add_subcommand("correlate", "Correlate language ubiquity with external impact scores");
        static std::string m, external, out;
        c->add_option("--m", m, "Specialization matrix CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--external", external, "language,impact_score CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--out", out, "Correlation JSON")->required();
        c->callback([&] { run = [] { return eclab_correlate_file(m.c_str(), external.c_str(), out.c_str()); }; });
    }
    // rank
    {
        auto* c = app.add_subcommand("rank", "Country ranking by ECI software next to external ECIs");
        static std::string eci, indicators, out;
        static bool sample = false;
        c->add_option("--eci", eci, "ECI CSV from the complexity command")->required()->check(CLI::ExistingFile);
        c->add_option("--indicators", indicators, "Country indicators CSV")->check(CLI::ExistingFile);
        c->add_flag("--sample-filter", sample, "Restrict to the population / exports / patents sample");
        c->add_option("--out", out, "Ranking CSV")->required();
        c->callback([&] { run = [] { return eclab_rank_file(eci.c_str(), opt(indicators), sample ? 1 : 0, out.c_str()); }; });
    }
    // pipeline
    {
        auto* c = app.add_subcommand("pipeline", "Run every stage from a TOML or JSON config");
        static std::string config, out_dir, languages, exclusions, indicators, adjacency, external, method, at_risk,
            ubiquity, base, post;
        static std::optional<int> year, top_n;
        static std::optional<double> rca_threshold, backbone_threshold;
        static bool no_iv = false, no_logit = false;
        c->add_option("--config", config, "Config file (.toml or .json)")->required()->check(CLI::ExistingFile);
        c->add_option("--out-dir", out_dir, "Override output.dir");
        c->add_option("--languages", languages, "Override inputs.languages");
        c->add_option("--exclusions", exclusions, "Override inputs.exclusions");
        c->add_option("--indicators", indicators, "Override inputs.indicators");
        c->add_option("--adjacency", adjacency, "Override inputs.adjacency");
        c->add_option("--external-scores", external, "Override inputs.external_scores");
        c->add_option("--year", year, "Override analysis.year");
        c->add_option("--top-n", top_n, "Override cleaning.top_n");
        c->add_option("--method", method, "Override analysis.method");
        c->add_option("--rca-threshold", rca_threshold, "Override analysis.rca_threshold");
        c->add_option("--backbone-threshold", backbone_threshold, "Override analysis.backbone_threshold");
        c->add_option("--at-risk", at_risk, "Override transitions.at_risk");
        c->add_option("--ubiquity", ubiquity, "Override transitions.ubiquity");
        c->add_option("--base", base, "Override window.base (comma-separated)");
        c->add_option("--post", post, "Override window.post (comma-separated)");
        c->add_flag("--no-iv", no_iv, "Skip instrumental-variable tables");
        c->add_flag("--no-logit", no_logit, "Skip logit tables");
        c->callback([&] {
            run = [] {
                nlohmann::json o = nlohmann::json::object();
                auto years = [](const std::string& s) {
                    nlohmann::json a = nlohmann::json::array();
                    std::size_t start = 0;
                    while (start <= s.size()) {
                        const auto end = s.find(',', start);
                        const auto tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
                        try {
                            a.push_back(std::stoi(tok));
                        } catch (const std::exception&) {
                            a.push_back(tok);  // rejected by config validation with the field name
                        }
                        if (end == std::string::npos) break;
                        start = end + 1;
                    }
                    return a;
                };
                if (!out_dir.empty()) o["output"]["dir"] = absolute(out_dir);
                if (!languages.empty()) o["inputs"]["languages"] = absolute(languages);
                if (!exclusions.empty()) o["inputs"]["exclusions"] = absolute(exclusions);
                if (!indicators.empty()) o["inputs"]["indicators"] = absolute(indicators);
                if (!adjacency.empty()) o["inputs"]["adjacency"] = absolute(adjacency);
                if (!external.empty()) o["inputs"]["external_scores"] = absolute(external);
                if (year) o["analysis"]["year"] = *year;
                if (top_n) o["cleaning"]["top_n"] = *top_n;
                if (!method.empty()) o["analysis"]["method"] = method;
                if (rca_threshold) o["analysis"]["rca_threshold"] = *rca_threshold;
                if (backbone_threshold) o["analysis"]["backbone_threshold"] = *backbone_threshold;
                if (!at_risk.empty()) o["transitions"]["at_risk"] = at_risk;
                if (!ubiquity.empty()) o["transitions"]["ubiquity"] = ubiquity;
                if (!base.empty()) o["window"]["base"] = years(base);
                if (!post.empty()) o["window"]["post"] = years(post);
                if (no_iv) o["regression"]["iv"] = false;
                if (no_logit) o["regression"]["logit"] = false;
                const auto patch = o.dump();
                return eclab_pipeline_run(config.c_str(), patch.c_str());
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    eclab_set_threads(threads);
    return report(run());
}
