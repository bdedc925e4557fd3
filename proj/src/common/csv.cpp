#include "common/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace eclab::csv {

std::string_view trim(std::string_view s) noexcept {
    const auto ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

bool is_missing_token(std::string_view s) noexcept {
    s = trim(s);
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null" || s == ".";
}

std::optional<double> parse_double(std::string_view s) noexcept {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s) noexcept {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) fail(ErrorCode::Internal, "cannot format number");
    return std::string(buf, ptr);
}

std::optional<std::size_t> Document::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name) return i;
    return std::nullopt;
}

std::size_t Document::require_column(std::string_view name, std::string_view context) const {
    auto idx = column(name);
    if (!idx)
        fail(ErrorCode::MissingColumn,
             std::string(context) + ": required column '" + std::string(name) + "' not found");
    return *idx;
}

Document parse(std::string_view text, bool has_header) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    Document doc;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_record = [&] {
        fields.push_back(std::move(field));
        field.clear();
        const bool blank = fields.size() == 1 && trim(fields[0]).empty() && !record_has_content;
        if (!blank) {
            if (has_header && doc.header.empty() && doc.records.empty()) {
                doc.header = std::move(fields);
                for (auto& h : doc.header) h = std::string(trim(h));
            } else {
                doc.records.push_back(Record{record_line, std::move(fields)});
            }
        }
        fields.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            record_has_content = true;
            break;
        case ',':
            fields.push_back(std::move(field));
            field.clear();
            record_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            record_line = line;
            break;
        default:
            field.push_back(c);
        }
    }
    if (in_quotes) fail(ErrorCode::UnparsableRow, "unterminated quoted field starting at line " +
                                                      std::to_string(record_line));
    if (!field.empty() || !fields.empty() || record_has_content) end_record();
    return doc;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Document read_file(const std::filesystem::path& path, bool has_header) {
    return parse(read_text(path), has_header);
}

std::string escape_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape_field(fields[i]);
    }
    out_ << '\n';
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace eclab::csv
