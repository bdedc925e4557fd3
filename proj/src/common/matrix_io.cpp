#include "common/matrix_io.hpp"

#include <set>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"

namespace eclab {

std::string to_wide_csv(const LabeledMatrix& m, const std::string& corner) {
    std::ostringstream out;
    csv::Writer w(out);
    std::vector<std::string> header{corner};
    header.insert(header.end(), m.cols.begin(), m.cols.end());
    w.row(header);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        std::vector<std::string> row{m.rows[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < m.values.cols(); ++j)
            row.push_back(csv::format_double(m.values(i, j)));
        w.row(row);
    }
    return out.str();
}

void write_wide_csv(const std::filesystem::path& path, const LabeledMatrix& m,
                    const std::string& corner) {
    csv::write_text(path, to_wide_csv(m, corner));
}

LabeledMatrix parse_wide_csv(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text);
    if (doc.header.size() < 2)
        fail(ErrorCode::MissingColumn, context + ": wide matrix needs a label column and at least one value column");

    LabeledMatrix m;
    m.cols.assign(doc.header.begin() + 1, doc.header.end());
    std::set<std::string> seen(m.cols.begin(), m.cols.end());
    if (seen.size() != m.cols.size())
        fail(ErrorCode::DuplicateKey, context + ": duplicate column label");

    m.values.resize(static_cast<Eigen::Index>(doc.records.size()),
                    static_cast<Eigen::Index>(m.cols.size()));
    std::set<std::string> row_seen;
    for (std::size_t r = 0; r < doc.records.size(); ++r) {
        const auto& rec = doc.records[r];
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) +
                                               ": expected " + std::to_string(doc.header.size()) +
                                               " fields");
        std::string label(csv::trim(rec.fields[0]));
        if (!row_seen.insert(label).second)
            fail(ErrorCode::DuplicateKey, context + ": duplicate row label '" + label + "'");
        m.rows.push_back(std::move(label));
        for (std::size_t c = 1; c < rec.fields.size(); ++c) {
            auto v = csv::parse_double(rec.fields[c]);
            if (!v)
                fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) +
                                                   ": malformed number '" + rec.fields[c] + "'");
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = *v;
        }
    }
    return m;
}

LabeledMatrix read_wide_csv(const std::filesystem::path& path) {
    return parse_wide_csv(csv::read_text(path), path.string());
}

}  // namespace eclab
