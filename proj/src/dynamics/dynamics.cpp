#include "dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/parallel.hpp"
#include "common/stats.hpp"

namespace eclab::dynamics {

using specialization::SpecializationMatrix;
using Eigen::Index;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t position(const Labels& labels, const std::string& s) {
    auto it = std::lower_bound(labels.begin(), labels.end(), s);
    return static_cast<std::size_t>(it - labels.begin());
}

void require_increasing(const std::vector<int>& years) {
    if (years.empty()) fail(ErrorCode::InvalidArgument, "panel needs at least one year");
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] <= years[i - 1])
            fail(ErrorCode::InvalidArgument, "panel years must be strictly increasing");
}

// Places each year's matrix into the union label space.
SpecializationPanel assemble(const std::vector<int>& years,
                             const std::vector<SpecializationMatrix>& ms,
                             const std::vector<LabeledMatrix>* counts) {
    require_increasing(years);
    std::set<std::string> cs, as;
    for (const auto& m : ms) {
        cs.insert(m.countries().begin(), m.countries().end());
        as.insert(m.activities().begin(), m.activities().end());
    }
    SpecializationPanel p;
    p.years = years;
    p.countries.assign(cs.begin(), cs.end());
    p.activities.assign(as.begin(), as.end());
    const auto nc = p.countries.size(), nl = p.activities.size();

    for (std::size_t y = 0; y < years.size(); ++y) {
        const auto& m = ms[y];
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(idx(nc), idx(nl));
        std::vector<bool> cp(nc, false), ap(nl, false);
        std::vector<std::size_t> rpos, cpos;
        for (const auto& c : m.countries()) {
            rpos.push_back(position(p.countries, c));
            cp[rpos.back()] = true;
        }
        for (const auto& a : m.activities()) {
            cpos.push_back(position(p.activities, a));
            ap[cpos.back()] = true;
        }
        for (std::size_t i = 0; i < rpos.size(); ++i)
            for (std::size_t j = 0; j < cpos.size(); ++j)
                full(idx(rpos[i]), idx(cpos[j])) = m.values()(idx(i), idx(j));
        p.m.push_back(std::move(full));

        if (counts) {
            const auto& x = (*counts)[y];
            if (x.rows != m.countries() || x.cols != m.activities())
                fail(ErrorCode::InvalidArgument, "panel: counts for " + std::to_string(years[y]) +
                                                     " do not align with its specialization matrix");
            Eigen::MatrixXd fx = Eigen::MatrixXd::Zero(idx(nc), idx(nl));
            for (std::size_t i = 0; i < rpos.size(); ++i)
                for (std::size_t j = 0; j < cpos.size(); ++j)
                    fx(idx(rpos[i]), idx(cpos[j])) = x.values(idx(i), idx(j));
            p.counts.push_back(std::move(fx));
        }

        for (std::size_t c = 0; c < nc; ++c)
            if (!cp[c]) p.flags.push_back(std::to_string(years[y]) + ": country " + p.countries[c] + " absent");
        for (std::size_t l = 0; l < nl; ++l)
            if (!ap[l]) p.flags.push_back(std::to_string(years[y]) + ": activity " + p.activities[l] + " absent");
        p.country_present.push_back(std::move(cp));
        p.activity_present.push_back(std::move(ap));
    }
    return p;
}

std::string join_years(const std::vector<int>& ys) {
    std::string out;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ys[i]);
    }
    return out;
}

}  // namespace

std::size_t SpecializationPanel::year_index(int year) const {
    auto it = std::find(years.begin(), years.end(), year);
    if (it == years.end()) fail(ErrorCode::YearMissing, "year " + std::to_string(year) + " not in panel");
    return static_cast<std::size_t>(it - years.begin());
}

SpecializationMatrix SpecializationPanel::matrix_for(int year) const {
    const auto y = year_index(year);
    std::vector<std::size_t> rs, cs;
    Labels rl, cl;
    for (std::size_t c = 0; c < countries.size(); ++c)
        if (country_present[y][c]) {
            rs.push_back(c);
            rl.push_back(countries[c]);
        }
    for (std::size_t l = 0; l < activities.size(); ++l)
        if (activity_present[y][l]) {
            cs.push_back(l);
            cl.push_back(activities[l]);
        }
    Eigen::MatrixXd v(idx(rs.size()), idx(cs.size()));
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = 0; j < cs.size(); ++j) v(idx(i), idx(j)) = m[y](idx(rs[i]), idx(cs[j]));
    return SpecializationMatrix(std::move(rl), std::move(cl), std::move(v));
}

SpecializationPanel build_panel(const ingest::YearlyCounts& yc, const std::vector<int>& years,
                                double threshold) {
    require_increasing(years);
    std::vector<SpecializationMatrix> ms;
    std::vector<LabeledMatrix> xs;
    for (int year : years) {
        auto x = specialization::build_count_matrix(yc, year);
        ms.push_back(specialization::binarize(specialization::rca(x), threshold));
        xs.push_back(specialization::to_labeled(x));
    }
    return assemble(years, ms, &xs);
}

SpecializationPanel load_panel_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(ErrorCode::Io, "panel directory '" + dir.string() + "' not found");
    std::vector<int> years;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() == 10 && name.rfind("m_", 0) == 0 && name.substr(6) == ".csv")
            if (auto y = csv::parse_int(name.substr(2, 4))) years.push_back(static_cast<int>(*y));
    }
    if (years.empty()) fail(ErrorCode::Io, "panel directory '" + dir.string() + "' has no m_<year>.csv files");
    std::sort(years.begin(), years.end());

    std::vector<SpecializationMatrix> ms;
    std::vector<LabeledMatrix> xs;
    std::size_t with_counts = 0;
    for (int y : years) {
        ms.push_back(specialization::specialization_from_labeled(
            read_wide_csv(dir / ("m_" + std::to_string(y) + ".csv"))));
        const auto cpath = dir / ("counts_" + std::to_string(y) + ".csv");
        if (fs::exists(cpath)) {
            xs.push_back(read_wide_csv(cpath));
            ++with_counts;
        }
    }
    if (with_counts != 0 && with_counts != years.size())
        fail(ErrorCode::InvalidArgument, "panel directory has counts files for only some years");
    return assemble(years, ms, with_counts ? &xs : nullptr);
}

void write_panel_dir(const std::filesystem::path& dir, const SpecializationPanel& p) {
    std::filesystem::create_directories(dir);
    for (std::size_t y = 0; y < p.years.size(); ++y) {
        const auto m = p.matrix_for(p.years[y]);
        write_wide_csv(dir / ("m_" + std::to_string(p.years[y]) + ".csv"), specialization::to_labeled(m), "country");
        if (p.has_counts()) {
            LabeledMatrix x{m.countries(), m.activities(), Eigen::MatrixXd(m.values().rows(), m.values().cols())};
            for (std::size_t i = 0; i < m.n_countries(); ++i)
                for (std::size_t j = 0; j < m.n_activities(); ++j)
                    x.values(idx(i), idx(j)) = p.counts[y](idx(position(p.countries, m.countries()[i])),
                                                           idx(position(p.activities, m.activities()[j])));
            write_wide_csv(dir / ("counts_" + std::to_string(p.years[y]) + ".csv"), x, "country");
        }
    }
}

std::string_view to_string(EventType t) noexcept { return t == EventType::Entry ? "entry" : "exit"; }

std::string WindowSpec::describe() const { return join_years(base) + "|" + join_years(post); }

EventTable detect_events(const SpecializationPanel& panel, const WindowSpec& window) {
    if (window.base.empty() || window.post.empty())
        fail(ErrorCode::InvalidArgument, "base and post windows must be nonempty");
    for (int b : window.base)
        if (std::find(window.post.begin(), window.post.end(), b) != window.post.end())
            fail(ErrorCode::WindowOverlap, "year " + std::to_string(b) + " is in both windows");
    std::vector<std::size_t> bi, pi;
    for (int y : window.base) bi.push_back(panel.year_index(y));
    for (int y : window.post) pi.push_back(panel.year_index(y));

    const auto nc = panel.countries.size(), nl = panel.activities.size();
    std::vector<std::vector<Event>> per_country(nc);
    parallel_for(nc, [&](std::size_t c) {
        for (std::size_t l = 0; l < nl; ++l) {
            auto all = [&](const std::vector<std::size_t>& ys, double v) {
                return std::all_of(ys.begin(), ys.end(),
                                   [&](std::size_t y) { return panel.m[y](idx(c), idx(l)) == v; });
            };
            if (all(bi, 0.0) && all(pi, 1.0))
                per_country[c].push_back({panel.countries[c], panel.activities[l], EventType::Entry});
            else if (all(bi, 1.0) && all(pi, 0.0))
                per_country[c].push_back({panel.countries[c], panel.activities[l], EventType::Exit});
        }
    });

    EventTable out{window, {}};
    for (auto& rows : per_country)
        for (auto& e : rows) out.rows.push_back(std::move(e));
    return out;
}

std::string_view to_string(AtRiskRule r) noexcept {
    switch (r) {
    case AtRiskRule::None: return "none";
    case AtRiskRule::NonzeroCount: return "nonzero-count";
    case AtRiskRule::RcaPositive: return "rca-positive";
    }
    return "none";
}

std::string_view to_string(UbiquityTransform t) noexcept {
    switch (t) {
    case UbiquityTransform::Raw: return "raw";
    case UbiquityTransform::ZScore: return "z";
    case UbiquityTransform::Log: return "log";
    }
    return "raw";
}

AtRiskRule parse_at_risk(std::string_view s) {
    if (s == "none") return AtRiskRule::None;
    if (s == "nonzero-count") return AtRiskRule::NonzeroCount;
    if (s == "rca-positive") return AtRiskRule::RcaPositive;
    fail(ErrorCode::InvalidArgument, "unknown at-risk rule '" + std::string(s) + "'");
}

UbiquityTransform parse_ubiquity_transform(std::string_view s) {
    if (s == "raw") return UbiquityTransform::Raw;
    if (s == "z" || s == "zscore" || s == "z-score") return UbiquityTransform::ZScore;
    if (s == "log") return UbiquityTransform::Log;
    fail(ErrorCode::InvalidArgument, "unknown ubiquity transform '" + std::string(s) + "'");
}

EventType parse_event_type(std::string_view s) {
    if (s == "entry") return EventType::Entry;
    if (s == "exit") return EventType::Exit;
    fail(ErrorCode::InvalidArgument, "unknown transition type '" + std::string(s) + "'");
}

BaseMeasures base_measures(const SpecializationPanel& panel, int base_year,
                           const relatedness::DensityOptions& opts) {
    BaseMeasures b;
    b.year = base_year;
    b.m = panel.matrix_for(base_year);
    b.phi = relatedness::proximity(b.m);
    b.density = relatedness::relatedness_density(b.m, b.phi, opts);
    return b;
}

TransitionDataset build_transition_dataset(const SpecializationPanel& panel, const EventTable& events,
                                           const BaseMeasures& base, const TransitionOptions& opts) {
    const auto& window = events.window;
    if (window.base.empty() || window.base.front() != base.year)
        fail(ErrorCode::InvalidArgument, "base measures must come from the first base year");
    const bool entry = opts.type == EventType::Entry;
    const bool floor = entry && opts.at_risk != AtRiskRule::None;
    if (floor && !panel.has_counts())
        fail(ErrorCode::Validation, std::string("at-risk rule '") + std::string(to_string(opts.at_risk)) +
                                        "' needs developer counts in the panel");

    std::vector<std::size_t> bi;
    for (int y : window.base) bi.push_back(panel.year_index(y));

    // Ubiquity per base-year activity, transformed across activities.
    const auto& ubi = base.m.ubiquity();
    std::vector<double> ubi_t(ubi.begin(), ubi.end());
    if (opts.ubiquity == UbiquityTransform::ZScore) {
        if (!(stats::pop_stddev(ubi_t) > 0.0))
            fail(ErrorCode::ConstantSeries, "ubiquity is constant across activities; cannot standardize");
        ubi_t = stats::standardize(ubi_t);
    } else if (opts.ubiquity == UbiquityTransform::Log) {
        for (auto& u : ubi_t) u = std::log(u);
    }

    std::set<std::pair<std::string, std::string>> hits;
    for (const auto& e : events.rows)
        if (e.type == opts.type) hits.emplace(e.country, e.activity);

    TransitionDataset out;
    out.type = opts.type;
    out.options = opts;
    out.window = window;
    const auto& bc = base.m.countries();
    const auto& ba = base.m.activities();
    for (std::size_t c = 0; c < panel.countries.size(); ++c) {
        for (std::size_t l = 0; l < panel.activities.size(); ++l) {
            const double want = entry ? 0.0 : 1.0;
            bool at_risk = std::all_of(bi.begin(), bi.end(),
                                       [&](std::size_t y) { return panel.m[y](idx(c), idx(l)) == want; });
            if (at_risk && floor)
                at_risk = std::all_of(bi.begin(), bi.end(), [&](std::size_t y) {
                    return panel.counts[y](idx(c), idx(l)) > 0.0 && panel.country_present[y][c] &&
                           panel.activity_present[y][l];
                });
            if (!at_risk) continue;

            auto ci = std::find(bc.begin(), bc.end(), panel.countries[c]);
            auto ai = std::find(ba.begin(), ba.end(), panel.activities[l]);
            if (ci == bc.end() || ai == ba.end()) {
                ++out.skipped_absent;
                continue;
            }
            const auto bci = static_cast<std::size_t>(ci - bc.begin());
            const auto bai = static_cast<std::size_t>(ai - ba.begin());
            TransitionRow row;
            row.country = panel.countries[c];
            row.activity = panel.activities[l];
            row.outcome = hits.count({row.country, row.activity}) ? 1 : 0;
            row.density = base.density.values(idx(bci), idx(bai));
            row.ubiquity_raw = ubi[bai];
            row.ubiquity = ubi_t[bai];
            row.country_id = c;
            row.activity_id = l;
            out.rows.push_back(std::move(row));
        }
    }
    if (out.rows.empty())
        fail(ErrorCode::EmptyAtRiskSet, std::string("no pairs at risk of ") + std::string(to_string(opts.type)));
    return out;
}

std::string events_to_csv(const EventTable& e) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"country", "activity", "event", "window"});
    const auto win = e.window.describe();
    for (const auto& r : e.rows) w.row({r.country, r.activity, std::string(to_string(r.type)), win});
    return out.str();
}

std::string transitions_to_csv(const TransitionDataset& d) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"country", "activity", "outcome", "density", "ubiquity", "ubiquity_raw", "country_id", "activity_id"});
    for (const auto& r : d.rows)
        w.row({r.country, r.activity, std::to_string(r.outcome), csv::format_double(r.density),
               csv::format_double(r.ubiquity), std::to_string(r.ubiquity_raw), std::to_string(r.country_id),
               std::to_string(r.activity_id)});
    return out.str();
}

std::map<std::string, double> parse_external_scores(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text);
    const auto cl = doc.require_column("language", context);
    const auto cs = doc.require_column("impact_score", context);
    std::map<std::string, double> out;
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) + ": wrong field count");
        if (csv::is_missing_token(rec.fields[cs])) continue;
        auto v = csv::parse_double(rec.fields[cs]);
        if (!v || !std::isfinite(*v))
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) + ": malformed score");
        if (!out.emplace(std::string(csv::trim(rec.fields[cl])), *v).second)
            fail(ErrorCode::DuplicateKey, context + ": line " + std::to_string(rec.line) + ": duplicate language");
    }
    return out;
}

std::map<std::string, double> load_external_scores(const std::filesystem::path& path) {
    return parse_external_scores(csv::read_text(path), path.string());
}

CorrelationReport correlate_ubiquity_external(const Labels& activities, const std::vector<int>& ubiquity,
                                              const std::map<std::string, double>& external) {
    if (activities.size() != ubiquity.size())
        fail(ErrorCode::InvalidArgument, "correlate: labels and ubiquity differ in length");
    CorrelationReport r;
    std::vector<double> x, y;
    std::set<std::string> matched;
    for (std::size_t i = 0; i < activities.size(); ++i) {
        auto it = external.find(activities[i]);
        if (it == external.end()) {
            r.unmatched_activities.push_back(activities[i]);
            continue;
        }
        matched.insert(activities[i]);
        x.push_back(ubiquity[i]);
        y.push_back(it->second);
    }
    for (const auto& [name, v] : external)
        if (!matched.count(name)) r.unmatched_external.push_back(name);
    if (x.size() < 3)
        fail(ErrorCode::InsufficientOverlap, "only " + std::to_string(x.size()) + " activities have external scores");

    r.n = x.size();
    const double df = static_cast<double>(r.n) - 2.0;
    auto p_of = [df](double rho) {
        if (std::isnan(rho)) return rho;
        if (std::fabs(rho) >= 1.0) return 0.0;
        return stats::two_sided_t_pvalue(rho * std::sqrt(df / (1.0 - rho * rho)), df);
    };
    r.pearson_r = stats::pearson(x, y);
    r.pearson_p = p_of(r.pearson_r);
    r.spearman_rho = stats::spearman(x, y);
    r.spearman_p = p_of(r.spearman_rho);
    return r;
}

}  // namespace eclab::dynamics
