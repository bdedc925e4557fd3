#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eclab::csv {

struct Record {
    std::size_t line = 0;  // 1-based physical line where the record starts
    std::vector<std::string> fields;
};

struct Document {
    std::vector<std::string> header;
    std::vector<Record> records;

    // Index of a header column, or nullopt. Matching is exact after trimming.
    std::optional<std::size_t> column(std::string_view name) const;
    // Same as column() but throws MissingColumn naming the file context.
    std::size_t require_column(std::string_view name, std::string_view context) const;
};

// RFC 4180 parsing: quoted fields, doubled quotes, CRLF, UTF-8 BOM.
// Blank lines are skipped. When has_header is false every record is data.
Document parse(std::string_view text, bool has_header = true);
Document read_file(const std::filesystem::path& path, bool has_header = true);

std::string read_text(const std::filesystem::path& path);

// Missing-value tokens: "", NA, NaN, nan, null, "."
bool is_missing_token(std::string_view s) noexcept;
std::string_view trim(std::string_view s) noexcept;

// Strict numeric parse of a whole (trimmed) token; nullopt on malformed input.
std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<long long> parse_int(std::string_view s) noexcept;

// Shortest round-trip representation; identical bytes for identical doubles.
std::string format_double(double v);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

std::string escape_field(std::string_view field);

// Writes bytes to `path`, replacing any existing file. Throws Io on failure.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace eclab::csv
