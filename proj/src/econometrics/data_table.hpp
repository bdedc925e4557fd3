#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eclab::econometrics {

// Column-named table of CSV cells. Numeric columns are parsed on access; missing
// tokens read as absent.
class DataTable {
public:
    static DataTable parse(const std::string& text, const std::string& context = "data");
    static DataTable load(const std::filesystem::path& path);

    std::size_t rows() const noexcept { return n_rows_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    bool has(const std::string& name) const noexcept;
    // Throws MissingColumn.
    std::size_t column(const std::string& name) const;

    const std::string& text(std::size_t col, std::size_t row) const { return cells_[col][row]; }
    // Absent for missing tokens; throws UnparsableRow for malformed numbers.
    std::optional<double> number(std::size_t col, std::size_t row) const;

    void add_column(const std::string& name, std::vector<std::string> cells);
    void add_numeric(const std::string& name, const std::vector<std::optional<double>>& values);

    std::string to_csv() const;

private:
    std::string context_;
    std::vector<std::string> names_;
    std::vector<std::vector<std::string>> cells_;
    std::vector<std::size_t> lines_;
    std::size_t n_rows_ = 0;
};

}  // namespace eclab::econometrics
