#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eclab {

using Labels = std::vector<std::string>;

// Dense matrix with row/column label registries, as exchanged through wide CSV.
struct LabeledMatrix {
    Labels rows;
    Labels cols;
    Eigen::MatrixXd values;
};

// Wide CSV: header "<corner>,<col1>,...,<colN>", then one row per row label.
std::string to_wide_csv(const LabeledMatrix& m, const std::string& corner);
void write_wide_csv(const std::filesystem::path& path, const LabeledMatrix& m,
                    const std::string& corner);
LabeledMatrix read_wide_csv(const std::filesystem::path& path);
LabeledMatrix parse_wide_csv(const std::string& text, const std::string& context);

}  // namespace eclab
