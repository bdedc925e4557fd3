#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "ingest/ingest.hpp"

using namespace eclab;
using namespace eclab::ingest;

namespace {

const char* kHeader = "num_pushers,language,iso2_code,year,quarter\n";

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Internal;
}

}  // namespace

TEST(Ghig, FourValidRows) {
    auto q = parse_ghig_text(std::string(kHeader) +
                             "10,Python,US,2020,1\n20,Go,US,2020,1\n5,Python,DE,2020,1\n7,Python,US,2020,2\n");
    EXPECT_EQ(q.rows.size(), 4u);
    EXPECT_EQ(q.dropped_rows, 0u);
}

TEST(Ghig, BlankCountryDropped) {
    auto q = parse_ghig_text(std::string(kHeader) + "10,Python,,2020,1\n20,Go,US,2020,1\n");
    EXPECT_EQ(q.rows.size(), 1u);
    EXPECT_EQ(q.dropped_rows, 1u);
}

TEST(Ghig, DuplicateKeyRejected) {
    EXPECT_EQ(code_of([] { parse_ghig_text(std::string(kHeader) + "10,Python,US,2020,1\n11,Python,US,2020,1\n"); }),
              ErrorCode::DuplicateKey);
}

TEST(Ghig, MissingColumn) {
    EXPECT_EQ(code_of([] { parse_ghig_text("num_pushers,language,year,quarter\n1,Go,2020,1\n"); }),
              ErrorCode::MissingColumn);
}

TEST(Ghig, UnparsableRowNamesLine) {
    try {
        parse_ghig_text(std::string(kHeader) + "10,Python,US,2020,1\nabc,Go,US,2020,1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnparsableRow);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Ghig, ColumnMapRenames) {
    ColumnMap cm;
    cm.country = "iso3";
    cm.developers = "users";
    auto q = parse_ghig_text("users,language,iso3,year,quarter\n3,Go,USA,2021,4\n", cm);
    ASSERT_EQ(q.rows.size(), 1u);
    EXPECT_EQ(q.rows[0].country, "USA");
    EXPECT_DOUBLE_EQ(q.rows[0].developers, 3.0);
}

TEST(Clean, ExclusionIsCaseInsensitive) {
    auto q = parse_ghig_text(std::string(kHeader) + "10,YAML,US,2020,1\n20,Go,US,2020,1\n");
    CleaningReport rep;
    auto y = clean_filter_aggregate(q, {"yaml"}, 150, &rep);
    ASSERT_EQ(y.rows.size(), 1u);
    EXPECT_EQ(y.rows[0].language, "Go");
    EXPECT_EQ(rep.excluded_languages, std::vector<std::string>{"YAML"});
}

TEST(Clean, DefaultExclusionsAreTheSix) {
    auto d = default_exclusions();
    std::set<std::string> s(d.begin(), d.end());
    EXPECT_EQ(s, (std::set<std::string>{"yaml", "json", "text", "svg", "Markdown", "xml"}));
}

TEST(Clean, QuarterMean) {
    auto q = parse_ghig_text(std::string(kHeader) +
                             "100,Go,US,2020,1\n200,Go,US,2020,2\n300,Go,US,2020,3\n400,Go,US,2020,4\n");
    auto y = clean_filter_aggregate(q, {}, 5);
    ASSERT_EQ(y.rows.size(), 1u);
    EXPECT_DOUBLE_EQ(y.rows[0].developers, 250.0);
}

TEST(Clean, MissingQuarterUsesPresentQuarters) {
    auto q = parse_ghig_text(std::string(kHeader) + "100,Go,US,2020,1\n300,Go,US,2020,3\n5,Go,DE,2020,2\n");
    auto y = clean_filter_aggregate(q, {}, 5);
    for (const auto& r : y.rows)
        if (r.country == "US") EXPECT_DOUBLE_EQ(r.developers, 200.0);
}

TEST(Clean, EmptyAfterFilter) {
    auto q = parse_ghig_text(std::string(kHeader) + "10,json,US,2020,1\n");
    EXPECT_EQ(code_of([&] { clean_filter_aggregate(q, {"JSON"}, 3); }), ErrorCode::EmptyAfterFilter);
    EXPECT_EQ(code_of([&] { clean_filter_aggregate(q, {}, 0); }), ErrorCode::InvalidArgument);
}

// 200 random languages over two years of quarters; the kept set must match an
// independent ranking by mean over all periods, ties by total then name.
TEST(Clean, TopNMatchesIndependentRanking) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> dev(0, 40);
    std::bernoulli_distribution present(0.7);
    std::ostringstream text;
    text << kHeader;
    std::map<std::string, double> totals;
    std::set<std::pair<int, int>> periods;
    for (int lang = 0; lang < 200; ++lang) {
        const std::string name = "lang" + std::to_string(lang);
        for (int year = 2020; year <= 2021; ++year)
            for (int qtr = 1; qtr <= 4; ++qtr)
                for (const char* c : {"US", "DE", "BR"}) {
                    if (!present(rng)) continue;
                    // Coarse values so ties on the mean actually happen.
                    const int d = dev(rng) / 10 * 10;
                    text << d << ',' << name << ',' << c << ',' << year << ',' << qtr << '\n';
                    totals[name] += d;
                    periods.emplace(year, qtr);
                }
    }
    auto q = parse_ghig_text(text.str());
    auto y = clean_filter_aggregate(q, {}, 150);

    std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
    const double np = static_cast<double>(periods.size());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        const double ma = a.second / np, mb = b.second / np;
        if (ma != mb) return ma > mb;
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::set<std::string> expected;
    for (std::size_t i = 0; i < 150; ++i) expected.insert(ranked[i].first);
    std::set<std::string> got;
    for (const auto& r : y.rows) got.insert(r.language);
    EXPECT_EQ(got.size(), 150u);
    EXPECT_EQ(got, expected);
}

TEST(Clean, IdempotentAndShrinking) {
    std::ostringstream text;
    text << kHeader;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dev(1, 500);
    std::set<std::tuple<int, std::string, std::string>> triples;
    double quarterly_total = 0.0;
    for (const char* lang : {"Go", "Rust", "yaml", "C", "Java", "Zig"})
        for (const char* c : {"US", "DE"})
            for (int year = 2020; year <= 2021; ++year)
                for (int qtr = 1; qtr <= 4; ++qtr) {
                    const int d = dev(rng);
                    text << d << ',' << lang << ',' << c << ',' << year << ',' << qtr << '\n';
                    triples.emplace(year, c, lang);
                    quarterly_total += d;
                }
    auto q = parse_ghig_text(text.str());
    auto once = clean_filter_aggregate(q, default_exclusions(), 4);

    QuarterlyCounts again;
    for (const auto& r : once.rows) again.rows.push_back({r.year, 1, r.country, r.language, r.developers});
    auto twice = clean_filter_aggregate(again, {}, 4);
    ASSERT_EQ(once.rows.size(), twice.rows.size());
    for (std::size_t i = 0; i < once.rows.size(); ++i) {
        EXPECT_EQ(once.rows[i].language, twice.rows[i].language);
        EXPECT_EQ(once.rows[i].country, twice.rows[i].country);
        EXPECT_DOUBLE_EQ(once.rows[i].developers, twice.rows[i].developers);
    }
    double yearly_total = 0.0;
    for (const auto& r : once.rows) yearly_total += r.developers;
    EXPECT_LE(yearly_total, quarterly_total);
    EXPECT_LE(once.rows.size(), triples.size());
}

TEST(Indicators, MissingIsAbsentNotZero) {
    auto ind = parse_indicators(
        "country,gdp_pc,population,natural_resources,gini_avg,emissions_per_gdp,exports_usd,patents\n"
        "AA,,1000000,0.1,30,0.2,2e9,10\n");
    const auto& r = ind.countries.at("AA");
    EXPECT_FALSE(r.gdp_pc.has_value());
    ASSERT_TRUE(r.population.has_value());
    EXPECT_DOUBLE_EQ(*r.population, 1e6);
    EXPECT_FALSE(r.eci_trade.has_value());
}

TEST(Indicators, Errors) {
    EXPECT_EQ(code_of([] { parse_indicators("country,gdp_pc\nAA,1\n"); }), ErrorCode::MissingColumn);
    EXPECT_EQ(code_of([] {
                  parse_indicators(
                      "country,gdp_pc,population,natural_resources,gini_avg,emissions_per_gdp,exports_usd,patents\n"
                      "AA,12x,1000000,0.1,30,0.2,2e9,10\n");
              }),
              ErrorCode::UnparsableRow);
}

TEST(Adjacency, SymmetricAndSelfLoop) {
    auto g = parse_adjacency("country_a,country_b\nAA,BB\n");
    EXPECT_TRUE(g.are_neighbors("AA", "BB"));
    EXPECT_TRUE(g.are_neighbors("BB", "AA"));
    EXPECT_FALSE(g.are_neighbors("AA", "CC"));
    EXPECT_EQ(code_of([] { parse_adjacency("country_a,country_b\nAA,AA\n"); }), ErrorCode::SelfLoop);
    auto empty = parse_adjacency("country_a,country_b\n");
    EXPECT_TRUE(empty.empty());
    EXPECT_FALSE(empty.are_neighbors("AA", "BB"));
}

TEST(SampleFilter, DefaultThresholds) {
    auto ind = parse_indicators(
        "country,gdp_pc,population,natural_resources,gini_avg,emissions_per_gdp,exports_usd,patents\n"
        "IN1,1,2e6,0.1,30,0.2,5e9,10\n"
        "SMALL,1,5e5,0.1,30,0.2,5e9,10\n"
        "NOPAT,1,2e6,0.1,30,0.2,5e9,\n"
        "EDGE,1,1000001,0.1,30,0.2,1000000001,4\n"
        "EXACT,1,1e6,0.1,30,0.2,5e9,10\n");
    auto sel = apply_sample_filters(ind);
    EXPECT_EQ(sel.included, (std::set<std::string>{"EDGE", "IN1"}));
    std::set<std::string> excluded;
    for (const auto& [c, why] : sel.excluded) {
        excluded.insert(c);
        EXPECT_FALSE(why.empty());
    }
    EXPECT_EQ(excluded, (std::set<std::string>{"EXACT", "NOPAT", "SMALL"}));
}

TEST(Exclusions, FileWithComments) {
    auto path = std::filesystem::temp_directory_path() / "eclab_excl_test.txt";
    {
        std::ofstream f(path);
        f << "# header\nyaml\n\n  json  \nsvg # inline\n";
    }
    EXPECT_EQ(load_exclusions(path), (std::vector<std::string>{"yaml", "json", "svg"}));
    std::filesystem::remove(path);
}
