#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ingest/ingest.hpp"
#include "relatedness/relatedness.hpp"
#include "specialization/specialization.hpp"

namespace eclab::dynamics {

// Yearly specialization matrices aligned on the union of labels (lexicographic).
// A label missing from a year has a zero row/column there and is flagged.
struct SpecializationPanel {
    std::vector<int> years;  // strictly increasing
    Labels countries;
    Labels activities;
    std::vector<Eigen::MatrixXd> m;       // 0/1 per year
    std::vector<Eigen::MatrixXd> counts;  // developer counts per year; empty if unknown
    std::vector<std::vector<bool>> country_present;
    std::vector<std::vector<bool>> activity_present;
    std::vector<std::string> flags;

    bool has_counts() const noexcept { return !counts.empty(); }
    // Throws YearMissing.
    std::size_t year_index(int year) const;
    // The year's matrix restricted to labels present that year.
    specialization::SpecializationMatrix matrix_for(int year) const;
};

SpecializationPanel build_panel(const ingest::YearlyCounts& y, const std::vector<int>& years,
                                double threshold = 1.0);

// Directory of m_<year>.csv files, optionally with counts_<year>.csv beside them.
SpecializationPanel load_panel_dir(const std::filesystem::path& dir);
void write_panel_dir(const std::filesystem::path& dir, const SpecializationPanel& p);

enum class EventType { Entry, Exit };
std::string_view to_string(EventType t) noexcept;

struct WindowSpec {
    std::vector<int> base;
    std::vector<int> post;

    std::string describe() const;  // "2020,2021|2022,2023"
};

struct Event {
    std::string country;
    std::string activity;
    EventType type = EventType::Entry;
};

struct EventTable {
    WindowSpec window;
    std::vector<Event> rows;  // ordered by country, then activity
};

// Entry: 0 in every base year and 1 in every post year; exit is the mirror image.
EventTable detect_events(const SpecializationPanel& panel, const WindowSpec& window);

enum class AtRiskRule { None, NonzeroCount, RcaPositive };
enum class UbiquityTransform { Raw, ZScore, Log };

std::string_view to_string(AtRiskRule r) noexcept;
std::string_view to_string(UbiquityTransform t) noexcept;
AtRiskRule parse_at_risk(std::string_view s);
UbiquityTransform parse_ubiquity_transform(std::string_view s);
EventType parse_event_type(std::string_view s);

// Relatedness density and ubiquity measured in the first base year.
struct BaseMeasures {
    int year = 0;
    specialization::SpecializationMatrix m;
    relatedness::ProximityMatrix phi;
    relatedness::DensityMatrix density;
};

BaseMeasures base_measures(const SpecializationPanel& panel, int base_year,
                           const relatedness::DensityOptions& opts = {});

struct TransitionOptions {
    EventType type = EventType::Entry;
    AtRiskRule at_risk = AtRiskRule::NonzeroCount;  // entry datasets only
    UbiquityTransform ubiquity = UbiquityTransform::ZScore;
};

struct TransitionRow {
    std::string country;
    std::string activity;
    int outcome = 0;
    double density = 0.0;
    double ubiquity = 0.0;  // transformed
    int ubiquity_raw = 0;
    std::size_t country_id = 0;   // index into the panel's country labels
    std::size_t activity_id = 0;  // index into the panel's activity labels
};

struct TransitionDataset {
    EventType type = EventType::Entry;
    TransitionOptions options;
    WindowSpec window;
    std::vector<TransitionRow> rows;
    std::size_t skipped_absent = 0;  // at-risk pairs with a label missing in the base year
};

TransitionDataset build_transition_dataset(const SpecializationPanel& panel, const EventTable& events,
                                           const BaseMeasures& base, const TransitionOptions& opts);

std::string events_to_csv(const EventTable& e);
std::string transitions_to_csv(const TransitionDataset& d);

struct CorrelationReport {
    std::size_t n = 0;
    double pearson_r = 0.0;
    double pearson_p = 0.0;
    double spearman_rho = 0.0;
    double spearman_p = 0.0;
    Labels unmatched_activities;  // have ubiquity, no external score
    Labels unmatched_external;    // have external score, not in the matrix
};

// External scores file: language,impact_score
std::map<std::string, double> load_external_scores(const std::filesystem::path& path);
std::map<std::string, double> parse_external_scores(const std::string& text, const std::string& context);

CorrelationReport correlate_ubiquity_external(const Labels& activities, const std::vector<int>& ubiquity,
                                              const std::map<std::string, double>& external);

}  // namespace eclab::dynamics
