#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace eclab::ingest {

// Header names in the GitHub Innovation Graph languages file. The defaults
// follow the published schema; override when upstream renames columns.
struct ColumnMap {
    std::string year = "year";
    std::string quarter = "quarter";
    std::string country = "iso2_code";
    std::string language = "language";
    std::string developers = "num_pushers";
};

struct QuarterlyRow {
    int year = 0;
    int quarter = 0;
    std::string country;
    std::string language;
    double developers = 0.0;
};

struct QuarterlyCounts {
    std::vector<QuarterlyRow> rows;
    std::size_t dropped_rows = 0;  // blank country or language
};

struct YearlyRow {
    int year = 0;
    std::string country;
    std::string language;
    double developers = 0.0;  // mean over the quarters present in that year
};

struct YearlyCounts {
    std::vector<YearlyRow> rows;  // sorted by (year, country, language)

    std::set<int> years() const;
};

struct CleaningReport {
    std::vector<std::string> excluded_languages;  // removed by the exclusion list
    std::vector<std::string> dropped_languages;   // below the top-N cut
    std::vector<std::string> kept_languages;      // in rank order
};

struct CountryIndicators {
    struct Record {
        std::optional<double> gdp_pc;
        std::optional<double> population;
        std::optional<double> natural_resources;
        std::optional<double> gini_avg;
        std::optional<double> emissions_per_gdp;
        std::optional<double> exports_usd;
        std::optional<double> patents;
        std::optional<double> eci_trade;
        std::optional<double> eci_tech;
        std::optional<double> eci_research;
    };
    std::map<std::string, Record> countries;
};

// Unordered country pairs sharing a land or maritime border; stored symmetrically.
class NeighborGraph {
public:
    // Throws SelfLoop for a == b.
    void add(const std::string& a, const std::string& b);
    bool are_neighbors(const std::string& a, const std::string& b) const;
    std::size_t pair_count() const noexcept { return adjacency_.size() / 2; }
    bool empty() const noexcept { return adjacency_.empty(); }

private:
    std::set<std::pair<std::string, std::string>> adjacency_;
};

struct SampleThresholds {
    double min_population = 1e6;   // strictly greater than
    double min_exports_usd = 1e9;  // strictly greater than
    double min_patents = 4.0;      // at least
};

struct SampleSelection {
    std::set<std::string> included;
    // Countries that failed a threshold or lacked a filter field, with the reason.
    std::vector<std::pair<std::string, std::string>> excluded;
};

QuarterlyCounts parse_ghig(const std::filesystem::path& path, const ColumnMap& columns = {});
QuarterlyCounts parse_ghig_text(const std::string& text, const ColumnMap& columns = {},
                                const std::string& context = "languages");

// The six data-format/markup names dropped before ranking languages.
std::vector<std::string> default_exclusions();
// One name per line; blank lines and '#' comments ignored.
std::vector<std::string> load_exclusions(const std::filesystem::path& path);

YearlyCounts clean_filter_aggregate(const QuarterlyCounts& q,
                                    const std::vector<std::string>& exclusions, int top_n,
                                    CleaningReport* report = nullptr);

// Long-form yearly counts file: year,country,language,developers
void write_yearly(const std::filesystem::path& path, const YearlyCounts& y);
std::string yearly_to_csv(const YearlyCounts& y);
YearlyCounts load_yearly(const std::filesystem::path& path);

CountryIndicators load_indicators(const std::filesystem::path& path);
CountryIndicators parse_indicators(const std::string& text, const std::string& context = "indicators");

NeighborGraph load_adjacency(const std::filesystem::path& path);
NeighborGraph parse_adjacency(const std::string& text, const std::string& context = "adjacency");

SampleSelection apply_sample_filters(const CountryIndicators& ind,
                                     const SampleThresholds& thresholds = {});

}  // namespace eclab::ingest
