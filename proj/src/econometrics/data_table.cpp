#include "econometrics/data_table.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"

namespace eclab::econometrics {

DataTable DataTable::parse(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text);
    DataTable t;
    t.context_ = context;
    t.names_ = doc.header;
    for (std::size_t i = 0; i < t.names_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (t.names_[i] == t.names_[j])
                fail(ErrorCode::DuplicateKey, context + ": duplicate column '" + t.names_[i] + "'");
    t.cells_.assign(t.names_.size(), {});
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != t.names_.size())
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) + ": expected " +
                                               std::to_string(t.names_.size()) + " fields");
        for (std::size_t c = 0; c < rec.fields.size(); ++c)
            t.cells_[c].emplace_back(csv::trim(rec.fields[c]));
        t.lines_.push_back(rec.line);
    }
    t.n_rows_ = doc.records.size();
    return t;
}

DataTable DataTable::load(const std::filesystem::path& path) { return parse(csv::read_text(path), path.string()); }

bool DataTable::has(const std::string& name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t DataTable::column(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(ErrorCode::MissingColumn, context_ + ": column '" + name + "' not found");
    return static_cast<std::size_t>(it - names_.begin());
}

std::optional<double> DataTable::number(std::size_t col, std::size_t row) const {
    const auto& cell = cells_[col][row];
    if (csv::is_missing_token(cell)) return std::nullopt;
    auto v = csv::parse_double(cell);
    if (!v) {
        const auto line = row < lines_.size() ? lines_[row] : row + 2;
        fail(ErrorCode::UnparsableRow, context_ + ": line " + std::to_string(line) + ": malformed number '" +
                                           cell + "' in column '" + names_[col] + "'");
    }
    return v;
}

void DataTable::add_column(const std::string& name, std::vector<std::string> cells) {
    if (has(name)) fail(ErrorCode::DuplicateKey, "column '" + name + "' already exists");
    if (!names_.empty() && cells.size() != n_rows_)
        fail(ErrorCode::InvalidArgument, "column '" + name + "' has the wrong length");
    if (names_.empty()) n_rows_ = cells.size();
    names_.push_back(name);
    cells_.push_back(std::move(cells));
}

void DataTable::add_numeric(const std::string& name, const std::vector<std::optional<double>>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (const auto& v : values) cells.push_back(v ? csv::format_double(*v) : std::string());
    add_column(name, std::move(cells));
}

std::string DataTable::to_csv() const {
    std::ostringstream out;
    csv::Writer w(out);
    w.row(names_);
    for (std::size_t r = 0; r < n_rows_; ++r) {
        std::vector<std::string> row;
        row.reserve(names_.size());
        for (const auto& col : cells_) row.push_back(col[r]);
        w.row(row);
    }
    return out.str();
}

}  // namespace eclab::econometrics
