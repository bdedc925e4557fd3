#include "pipeline/config.hpp"

#include <set>
#include <sstream>

#include <toml.hpp>

#include "common/csv.hpp"
#include "common/error.hpp"

namespace eclab::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    fail(ErrorCode::Validation, "config field '" + field + "': " + why);
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"inputs", {"languages", "exclusions", "indicators", "adjacency", "external_scores"}},
        {"columns", {"year", "quarter", "country", "language", "developers"}},
        {"cleaning", {"top_n"}},
        {"analysis", {"year", "rca_threshold", "method", "backbone_threshold", "density_include_self"}},
        {"window", {"base", "post"}},
        {"transitions", {"at_risk", "ubiquity"}},
        {"sample", {"enabled", "min_population", "min_exports_usd", "min_patents"}},
        {"instrument", {"peers"}},
        {"regression", {"macro_se", "transition_se", "iv", "logit"}},
        {"output", {"dir"}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(const json& doc) : doc_(doc) {}

    const json* find(const std::string& section, const std::string& key) const {
        if (!doc_.contains(section)) return nullptr;
        const auto& s = doc_[section];
        return s.contains(key) ? &s[key] : nullptr;
    }

    std::optional<std::string> string(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_string()) invalid(section + "." + key, "expected a string");
        return v->get<std::string>();
    }

    std::optional<double> number(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_number()) invalid(section + "." + key, "expected a number");
        return v->get<double>();
    }

    std::optional<int> integer(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_number_integer()) invalid(section + "." + key, "expected an integer");
        return v->get<int>();
    }

    std::optional<bool> boolean(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_boolean()) invalid(section + "." + key, "expected true or false");
        return v->get<bool>();
    }

    std::optional<std::vector<int>> years(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_array()) invalid(section + "." + key, "expected an array of years");
        std::vector<int> out;
        for (const auto& y : *v) {
            if (!y.is_number_integer()) invalid(section + "." + key, "expected integer years");
            out.push_back(y.get<int>());
        }
        return out;
    }

private:
    const json& doc_;
};

fs::path resolve(const std::string& p, const fs::path& base) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

fs::path existing_file(const std::string& field, const std::string& p, const fs::path& base) {
    if (p.empty()) invalid(field, "empty path");
    auto path = resolve(p, base);
    if (!fs::is_regular_file(path)) invalid(field, "file not found: " + path.string());
    return path;
}

econometrics::SeType se_type(const std::string& field, const std::string& s) {
    if (s == "classical") return econometrics::SeType::Classical;
    if (s == "robust") return econometrics::SeType::Robust;
    if (s == "clustered") return econometrics::SeType::Clustered;
    invalid(field, "expected classical, robust or clustered, got '" + s + "'");
}

}  // namespace

json read_config_document(const fs::path& path) {
    if (!fs::is_regular_file(path)) fail(ErrorCode::Validation, "config file not found: " + path.string());
    const auto text = csv::read_text(path);
    const auto ext = path.extension().string();
    if (ext == ".json") {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::Validation, path.string() + ": invalid JSON: " + e.what());
        }
    }
    if (ext != ".toml") fail(ErrorCode::Validation, path.string() + ": config must be .toml or .json");
    try {
        const auto table = toml::parse(text, path.string());
        std::ostringstream out;
        out << toml::json_formatter{table};
        return json::parse(out.str());
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
        fail(ErrorCode::Validation, msg.str());
    }
}

PipelineConfig config_from_json(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) fail(ErrorCode::Validation, "config must be a table of sections");
    for (const auto& [section, body] : doc.items()) {
        auto it = schema().find(section);
        if (it == schema().end()) invalid(section, "unknown section");
        if (!body.is_object()) invalid(section, "expected a table");
        for (const auto& [key, v] : body.items())
            if (!it->second.count(key)) invalid(section + "." + key, "unknown key");
    }

    const Reader r(doc);
    PipelineConfig c;

    auto languages = r.string("inputs", "languages");
    if (!languages) invalid("inputs.languages", "required");
    c.languages = existing_file("inputs.languages", *languages, base_dir);
    if (auto v = r.string("inputs", "exclusions")) c.exclusions = existing_file("inputs.exclusions", *v, base_dir);
    if (auto v = r.string("inputs", "indicators")) c.indicators = existing_file("inputs.indicators", *v, base_dir);
    if (auto v = r.string("inputs", "adjacency")) c.adjacency = existing_file("inputs.adjacency", *v, base_dir);
    if (auto v = r.string("inputs", "external_scores"))
        c.external_scores = existing_file("inputs.external_scores", *v, base_dir);

    if (auto v = r.string("columns", "year")) c.columns.year = *v;
    if (auto v = r.string("columns", "quarter")) c.columns.quarter = *v;
    if (auto v = r.string("columns", "country")) c.columns.country = *v;
    if (auto v = r.string("columns", "language")) c.columns.language = *v;
    if (auto v = r.string("columns", "developers")) c.columns.developers = *v;

    if (auto v = r.integer("cleaning", "top_n")) c.top_n = *v;
    if (c.top_n < 1) invalid("cleaning.top_n", "must be at least 1");

    if (auto v = r.integer("analysis", "year")) c.year = *v;
    if (auto v = r.number("analysis", "rca_threshold")) c.rca_threshold = *v;
    if (!(c.rca_threshold > 0.0)) invalid("analysis.rca_threshold", "must be positive");
    if (auto v = r.string("analysis", "method")) {
        if (*v != "eigen" && *v != "iterate") invalid("analysis.method", "expected eigen or iterate");
        c.method = complexity::parse_method(*v);
    }
    if (auto v = r.number("analysis", "backbone_threshold")) c.backbone_threshold = *v;
    if (!(c.backbone_threshold >= 0.0 && c.backbone_threshold <= 1.0))
        invalid("analysis.backbone_threshold", "must lie in [0, 1]");
    if (auto v = r.boolean("analysis", "density_include_self")) c.density_include_self = *v;

    if (auto v = r.years("window", "base")) c.window.base = *v;
    if (auto v = r.years("window", "post")) c.window.post = *v;
    if (c.window.base.empty()) invalid("window.base", "must list at least one year");
    if (c.window.post.empty()) invalid("window.post", "must list at least one year");
    for (int b : c.window.base)
        for (int p : c.window.post)
            if (b == p) invalid("window", "base and post windows share year " + std::to_string(b));

    try {
        if (auto v = r.string("transitions", "at_risk")) c.at_risk = dynamics::parse_at_risk(*v);
    } catch (const Error& e) {
        invalid("transitions.at_risk", e.detail());
    }
    try {
        if (auto v = r.string("transitions", "ubiquity")) c.ubiquity = dynamics::parse_ubiquity_transform(*v);
    } catch (const Error& e) {
        invalid("transitions.ubiquity", e.detail());
    }

    if (auto v = r.boolean("sample", "enabled")) c.sample_filter = *v;
    if (auto v = r.number("sample", "min_population")) c.sample.min_population = *v;
    if (auto v = r.number("sample", "min_exports_usd")) c.sample.min_exports_usd = *v;
    if (auto v = r.number("sample", "min_patents")) c.sample.min_patents = *v;

    if (auto v = r.integer("instrument", "peers")) c.instrument_peers = *v;
    if (c.instrument_peers < 1) invalid("instrument.peers", "must be at least 1");

    if (auto v = r.string("regression", "macro_se")) c.macro_se = se_type("regression.macro_se", *v);
    if (c.macro_se == econometrics::SeType::Clustered)
        invalid("regression.macro_se", "country-level models have one row per cluster; use robust or classical");
    if (auto v = r.string("regression", "transition_se")) c.transition_se = se_type("regression.transition_se", *v);
    if (auto v = r.boolean("regression", "iv")) c.include_iv = *v;
    if (auto v = r.boolean("regression", "logit")) c.include_logit = *v;

    auto out = r.string("output", "dir");
    if (!out || out->empty()) invalid("output.dir", "required");
    c.output_dir = resolve(*out, base_dir);
    if (fs::exists(c.output_dir) && !fs::is_directory(c.output_dir))
        invalid("output.dir", "exists and is not a directory: " + c.output_dir.string());
    return c;
}

PipelineConfig load_config(const fs::path& path, const json& overrides) {
    auto doc = read_config_document(path);
    if (!overrides.is_null() && !overrides.empty()) doc.merge_patch(overrides);
    auto base = fs::absolute(path).parent_path();
    return config_from_json(doc, base);
}

std::string toml_library_version() {
    return std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." + std::to_string(TOML_LIB_PATCH);
}

json effective_config(const PipelineConfig& c) {
    auto name = [](const std::optional<fs::path>& p) { return p ? json(p->filename().string()) : json(nullptr); };
    return {
        {"inputs",
         {{"languages", c.languages.filename().string()},
          {"exclusions", name(c.exclusions)},
          {"indicators", name(c.indicators)},
          {"adjacency", name(c.adjacency)},
          {"external_scores", name(c.external_scores)}}},
        {"columns",
         {{"year", c.columns.year},
          {"quarter", c.columns.quarter},
          {"country", c.columns.country},
          {"language", c.columns.language},
          {"developers", c.columns.developers}}},
        {"cleaning", {{"top_n", c.top_n}}},
        {"analysis",
         {{"year", c.year},
          {"rca_threshold", c.rca_threshold},
          {"method", std::string(complexity::to_string(c.method))},
          {"backbone_threshold", c.backbone_threshold},
          {"density_include_self", c.density_include_self}}},
        {"window", {{"base", c.window.base}, {"post", c.window.post}}},
        {"transitions",
         {{"at_risk", std::string(dynamics::to_string(c.at_risk))},
          {"ubiquity", std::string(dynamics::to_string(c.ubiquity))}}},
        {"sample",
         {{"enabled", c.sample_filter},
          {"min_population", c.sample.min_population},
          {"min_exports_usd", c.sample.min_exports_usd},
          {"min_patents", c.sample.min_patents}}},
        {"instrument", {{"peers", c.instrument_peers}}},
        {"regression",
         {{"macro_se", std::string(econometrics::to_string(c.macro_se))},
          {"transition_se", std::string(econometrics::to_string(c.transition_se))},
          {"iv", c.include_iv},
          {"logit", c.include_logit}}},
    };
}

}  // namespace eclab::pipeline
