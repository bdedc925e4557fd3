#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "complexity/complexity.hpp"
#include "dynamics/dynamics.hpp"
#include "econometrics/econometrics.hpp"
#include "ingest/ingest.hpp"

namespace eclab::pipeline {

struct PipelineConfig {
    // inputs
    std::filesystem::path languages;
    std::optional<std::filesystem::path> exclusions;  // default list when absent
    std::optional<std::filesystem::path> indicators;
    std::optional<std::filesystem::path> adjacency;
    std::optional<std::filesystem::path> external_scores;
    ingest::ColumnMap columns;

    // cleaning
    int top_n = 150;

    // analysis
    int year = 2020;
    double rca_threshold = 1.0;
    complexity::Method method = complexity::Method::Eigen;
    double backbone_threshold = 0.5;
    bool density_include_self = true;

    // dynamics
    dynamics::WindowSpec window{{2020, 2021}, {2022, 2023}};
    dynamics::AtRiskRule at_risk = dynamics::AtRiskRule::NonzeroCount;
    dynamics::UbiquityTransform ubiquity = dynamics::UbiquityTransform::ZScore;

    // regressions
    bool sample_filter = true;
    ingest::SampleThresholds sample;
    int instrument_peers = 3;
    econometrics::SeType macro_se = econometrics::SeType::Robust;
    econometrics::SeType transition_se = econometrics::SeType::Clustered;
    bool include_iv = true;
    bool include_logit = true;

    std::filesystem::path output_dir;
};

// Reads a TOML (.toml) or JSON (.json) config file into a JSON document.
nlohmann::json read_config_document(const std::filesystem::path& path);

// Validates a config document. Relative paths resolve against base_dir.
// Throws Validation naming the offending field; input files must exist.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Loads a config file and applies overrides (a JSON merge patch with the same
// layout) on top of it.
PipelineConfig load_config(const std::filesystem::path& path, const nlohmann::json& overrides = nlohmann::json::object());

// Every setting in effect, in document layout. Input paths are reduced to file
// names and the output directory is left out so relocated runs compare equal.
nlohmann::json effective_config(const PipelineConfig& c);

// Version of the TOML parser, for the manifest.
std::string toml_library_version();

}  // namespace eclab::pipeline
