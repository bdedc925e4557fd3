#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "pipeline/config.hpp"

namespace eclab::pipeline {

struct PipelineResult {
    std::vector<std::string> artifacts;  // file names in output_dir, sorted
    nlohmann::json manifest;
    std::vector<std::string> warnings;
};

// Runs cleaning through regressions and writes every artifact plus manifest.json
// into cfg.output_dir. Outputs are staged and only moved into place once every
// stage has succeeded; a failure names the stage and leaves no partial files.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace eclab::pipeline
