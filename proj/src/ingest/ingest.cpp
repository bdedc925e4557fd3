#include "ingest/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <tuple>

#include "common/csv.hpp"
#include "common/error.hpp"

namespace eclab::ingest {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string at_line(const std::string& context, std::size_t line) {
    return context + ": row at line " + std::to_string(line);
}

}  // namespace

std::set<int> YearlyCounts::years() const {
    std::set<int> out;
    for (const auto& r : rows) out.insert(r.year);
    return out;
}

void NeighborGraph::add(const std::string& a, const std::string& b) {
    if (a == b) fail(ErrorCode::SelfLoop, "country '" + a + "' listed as its own neighbor");
    adjacency_.emplace(a, b);
    adjacency_.emplace(b, a);
}

bool NeighborGraph::are_neighbors(const std::string& a, const std::string& b) const {
    return adjacency_.count({a, b}) > 0;
}

QuarterlyCounts parse_ghig_text(const std::string& text, const ColumnMap& columns,
                                const std::string& context) {
    const auto doc = csv::parse(text);
    const auto c_year = doc.require_column(columns.year, context);
    const auto c_quarter = doc.require_column(columns.quarter, context);
    const auto c_country = doc.require_column(columns.country, context);
    const auto c_language = doc.require_column(columns.language, context);
    const auto c_devs = doc.require_column(columns.developers, context);

    QuarterlyCounts out;
    std::set<std::tuple<int, int, std::string, std::string>> keys;
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": expected " +
                                               std::to_string(doc.header.size()) + " fields, got " +
                                               std::to_string(rec.fields.size()));
        const std::string country(csv::trim(rec.fields[c_country]));
        const std::string language(csv::trim(rec.fields[c_language]));
        if (country.empty() || language.empty()) {
            ++out.dropped_rows;
            continue;
        }
        const auto year = csv::parse_int(rec.fields[c_year]);
        const auto quarter = csv::parse_int(rec.fields[c_quarter]);
        const auto devs = csv::parse_double(rec.fields[c_devs]);
        if (!year) fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": bad year '" + rec.fields[c_year] + "'");
        if (!quarter || *quarter < 1 || *quarter > 4)
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": bad quarter '" + rec.fields[c_quarter] + "'");
        if (!devs || !std::isfinite(*devs) || *devs < 0.0)
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": bad developer count '" + rec.fields[c_devs] + "'");

        QuarterlyRow row{static_cast<int>(*year), static_cast<int>(*quarter), country, language, *devs};
        if (!keys.emplace(row.year, row.quarter, row.country, row.language).second)
            fail(ErrorCode::DuplicateKey, at_line(context, rec.line) + ": duplicate key (" +
                                              std::to_string(row.year) + ", Q" +
                                              std::to_string(row.quarter) + ", " + country + ", " +
                                              language + ")");
        out.rows.push_back(std::move(row));
    }
    return out;
}

QuarterlyCounts parse_ghig(const std::filesystem::path& path, const ColumnMap& columns) {
    return parse_ghig_text(csv::read_text(path), columns, path.string());
}

std::vector<std::string> default_exclusions() {
    return {"yaml", "json", "text", "svg", "Markdown", "xml"};
}

std::vector<std::string> load_exclusions(const std::filesystem::path& path) {
    std::istringstream in(csv::read_text(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto name = csv::trim(line);
        if (!name.empty()) out.emplace_back(name);
    }
    return out;
}

YearlyCounts clean_filter_aggregate(const QuarterlyCounts& q,
                                    const std::vector<std::string>& exclusions, int top_n,
                                    CleaningReport* report) {
    if (top_n < 1) fail(ErrorCode::InvalidArgument, "top_n must be >= 1");

    std::set<std::string> excluded_lower;
    for (const auto& e : exclusions) excluded_lower.insert(lower(csv::trim(e)));

    std::set<std::pair<int, int>> periods;
    std::set<std::string> excluded_seen;
    struct LanguageTotal {
        double total = 0.0;
    };
    std::map<std::string, LanguageTotal> totals;
    for (const auto& r : q.rows) {
        periods.emplace(r.year, r.quarter);
        if (excluded_lower.count(lower(r.language))) {
            excluded_seen.insert(r.language);
            continue;
        }
        totals[r.language].total += r.developers;
    }
    if (totals.empty()) fail(ErrorCode::EmptyAfterFilter, "no language survives the exclusion list");

    // Mean over every period in the data (absent periods contribute zero).
    const double n_periods = static_cast<double>(std::max<std::size_t>(1, periods.size()));
    struct Ranked {
        std::string name;
        double mean;
        double total;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(totals.size());
    for (const auto& [name, t] : totals) ranked.push_back({name, t.total / n_periods, t.total});
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        if (a.total != b.total) return a.total > b.total;
        return a.name < b.name;
    });

    const auto keep_n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(top_n));
    std::set<std::string> kept;
    for (std::size_t i = 0; i < keep_n; ++i) kept.insert(ranked[i].name);

    if (report) {
        report->excluded_languages.assign(excluded_seen.begin(), excluded_seen.end());
        report->kept_languages.clear();
        report->dropped_languages.clear();
        for (std::size_t i = 0; i < ranked.size(); ++i)
            (i < keep_n ? report->kept_languages : report->dropped_languages).push_back(ranked[i].name);
    }

    struct Acc {
        double sum = 0.0;
        int quarters = 0;
    };
    std::map<std::tuple<int, std::string, std::string>, Acc> acc;
    for (const auto& r : q.rows) {
        if (!kept.count(r.language)) continue;
        auto& a = acc[{r.year, r.country, r.language}];
        a.sum += r.developers;
        ++a.quarters;
    }

    YearlyCounts out;
    out.rows.reserve(acc.size());
    for (const auto& [key, a] : acc) {
        const auto& [year, country, language] = key;
        out.rows.push_back({year, country, language, a.sum / a.quarters});
    }
    return out;
}

std::string yearly_to_csv(const YearlyCounts& y) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"year", "country", "language", "developers"});
    for (const auto& r : y.rows)
        w.row({std::to_string(r.year), r.country, r.language, csv::format_double(r.developers)});
    return out.str();
}

void write_yearly(const std::filesystem::path& path, const YearlyCounts& y) {
    csv::write_text(path, yearly_to_csv(y));
}

YearlyCounts load_yearly(const std::filesystem::path& path) {
    const auto ctx = path.string();
    const auto doc = csv::read_file(path);
    const auto c_year = doc.require_column("year", ctx);
    const auto c_country = doc.require_column("country", ctx);
    const auto c_language = doc.require_column("language", ctx);
    const auto c_devs = doc.require_column("developers", ctx);

    std::map<std::tuple<int, std::string, std::string>, double> rows;
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, at_line(ctx, rec.line) + ": wrong field count");
        const auto year = csv::parse_int(rec.fields[c_year]);
        const auto devs = csv::parse_double(rec.fields[c_devs]);
        if (!year || !devs || !std::isfinite(*devs) || *devs < 0.0)
            fail(ErrorCode::UnparsableRow, at_line(ctx, rec.line) + ": malformed value");
        std::string country(csv::trim(rec.fields[c_country]));
        std::string language(csv::trim(rec.fields[c_language]));
        if (!rows.emplace(std::make_tuple(static_cast<int>(*year), country, language), *devs).second)
            fail(ErrorCode::DuplicateKey, at_line(ctx, rec.line) + ": duplicate (year, country, language)");
    }
    YearlyCounts out;
    for (const auto& [key, v] : rows) out.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
    return out;
}

CountryIndicators parse_indicators(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text);
    using Field = std::optional<double> CountryIndicators::Record::*;
    struct Spec {
        const char* name;
        Field field;
        bool required;
    };
    static const Spec specs[] = {
        {"gdp_pc", &CountryIndicators::Record::gdp_pc, true},
        {"population", &CountryIndicators::Record::population, true},
        {"natural_resources", &CountryIndicators::Record::natural_resources, true},
        {"gini_avg", &CountryIndicators::Record::gini_avg, true},
        {"emissions_per_gdp", &CountryIndicators::Record::emissions_per_gdp, true},
        {"exports_usd", &CountryIndicators::Record::exports_usd, true},
        {"patents", &CountryIndicators::Record::patents, true},
        {"eci_trade", &CountryIndicators::Record::eci_trade, false},
        {"eci_tech", &CountryIndicators::Record::eci_tech, false},
        {"eci_research", &CountryIndicators::Record::eci_research, false},
    };

    const auto c_country = doc.require_column("country", context);
    std::vector<std::pair<std::size_t, Field>> present;
    for (const auto& s : specs) {
        if (s.required) {
            present.emplace_back(doc.require_column(s.name, context), s.field);
        } else if (auto idx = doc.column(s.name)) {
            present.emplace_back(*idx, s.field);
        }
    }

    CountryIndicators out;
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": expected " +
                                               std::to_string(doc.header.size()) + " fields");
        std::string country(csv::trim(rec.fields[c_country]));
        if (country.empty()) fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": blank country");
        CountryIndicators::Record r;
        for (const auto& [idx, field] : present) {
            const auto& cell = rec.fields[idx];
            if (csv::is_missing_token(cell)) continue;
            auto v = csv::parse_double(cell);
            if (!v || !std::isfinite(*v))
                fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": malformed number '" +
                                                   cell + "' in column '" + doc.header[idx] + "'");
            r.*field = *v;
        }
        if (r.population && *r.population <= 0.0)
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": population must be positive");
        if (!out.countries.emplace(country, r).second)
            fail(ErrorCode::DuplicateKey, at_line(context, rec.line) + ": duplicate country '" + country + "'");
    }
    return out;
}

CountryIndicators load_indicators(const std::filesystem::path& path) {
    return parse_indicators(csv::read_text(path), path.string());
}

NeighborGraph parse_adjacency(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text, /*has_header=*/false);
    NeighborGraph g;
    for (std::size_t i = 0; i < doc.records.size(); ++i) {
        const auto& rec = doc.records[i];
        if (rec.fields.size() != 2)
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": expected two columns");
        const std::string a(csv::trim(rec.fields[0]));
        const std::string b(csv::trim(rec.fields[1]));
        if (i == 0 && a == "country_a" && b == "country_b") continue;
        if (a.empty() || b.empty())
            fail(ErrorCode::UnparsableRow, at_line(context, rec.line) + ": blank country code");
        g.add(a, b);
    }
    return g;
}

NeighborGraph load_adjacency(const std::filesystem::path& path) {
    return parse_adjacency(csv::read_text(path), path.string());
}

SampleSelection apply_sample_filters(const CountryIndicators& ind, const SampleThresholds& t) {
    SampleSelection out;
    for (const auto& [country, r] : ind.countries) {
        std::string reason;
        if (!r.population) reason = "population missing";
        else if (!r.exports_usd) reason = "exports_usd missing";
        else if (!r.patents) reason = "patents missing";
        else if (!(*r.population > t.min_population)) reason = "population below threshold";
        else if (!(*r.exports_usd > t.min_exports_usd)) reason = "exports below threshold";
        else if (!(*r.patents >= t.min_patents)) reason = "patents below threshold";

        if (reason.empty()) out.included.insert(country);
        else out.excluded.emplace_back(country, reason);
    }
    return out;
}

}  // namespace eclab::ingest
