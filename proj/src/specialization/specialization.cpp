#include "specialization/specialization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "common/error.hpp"
#include "common/parallel.hpp"

namespace eclab::specialization {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Descending by total, ties lexicographic; returns positions into `labels`.
std::vector<std::size_t> order_by_total(const Labels& labels, const std::vector<double>& totals) {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (totals[a] != totals[b]) return totals[a] > totals[b];
        return labels[a] < labels[b];
    });
    return order;
}

}  // namespace

SpecializationMatrix::SpecializationMatrix(Labels countries, Labels activities,
                                           Eigen::MatrixXd values)
    : countries_(std::move(countries)), activities_(std::move(activities)), values_(std::move(values)) {
    if (values_.rows() != idx(countries_.size()) || values_.cols() != idx(activities_.size()))
        fail(ErrorCode::InvalidArgument, "specialization matrix dimensions do not match labels");
    diversity_.assign(countries_.size(), 0);
    ubiquity_.assign(activities_.size(), 0);
    for (Index c = 0; c < values_.rows(); ++c) {
        for (Index l = 0; l < values_.cols(); ++l) {
            const double v = values_(c, l);
            if (v != 0.0 && v != 1.0)
                fail(ErrorCode::InvalidArgument, "specialization matrix entry (" + countries_[c] +
                                                     ", " + activities_[l] + ") is not 0/1");
            if (v == 1.0) {
                ++diversity_[static_cast<std::size_t>(c)];
                ++ubiquity_[static_cast<std::size_t>(l)];
            }
        }
    }
}

void SpecializationMatrix::require_nonempty_margins() const {
    if (countries_.empty() || activities_.empty())
        fail(ErrorCode::DegenerateMatrix, "specialization matrix is empty");
    for (std::size_t c = 0; c < countries_.size(); ++c)
        if (diversity_[c] == 0)
            fail(ErrorCode::DegenerateMatrix, "country '" + countries_[c] + "' has zero diversity");
    for (std::size_t l = 0; l < activities_.size(); ++l)
        if (ubiquity_[l] == 0)
            fail(ErrorCode::DegenerateMatrix, "activity '" + activities_[l] + "' has zero ubiquity");
}

CountMatrix make_count_matrix(Labels countries, Labels activities, Eigen::MatrixXd counts, int year) {
    if (counts.rows() != idx(countries.size()) || counts.cols() != idx(activities.size()))
        fail(ErrorCode::InvalidArgument, "count matrix dimensions do not match labels");
    for (Index i = 0; i < counts.rows(); ++i)
        for (Index j = 0; j < counts.cols(); ++j)
            if (!std::isfinite(counts(i, j)) || counts(i, j) < 0.0)
                fail(ErrorCode::InvalidArgument, "count matrix entries must be finite and >= 0");

    std::vector<std::size_t> keep_rows, keep_cols;
    CountMatrix out;
    out.year = year;
    for (std::size_t i = 0; i < countries.size(); ++i) {
        double s = 0.0;
        for (Index j = 0; j < counts.cols(); ++j) s += counts(idx(i), j);
        if (s > 0.0) keep_rows.push_back(i);
        else out.dropped_countries.push_back(countries[i]);
    }
    for (std::size_t j = 0; j < activities.size(); ++j) {
        double s = 0.0;
        for (Index i = 0; i < counts.rows(); ++i) s += counts(i, idx(j));
        if (s > 0.0) keep_cols.push_back(j);
        else out.dropped_activities.push_back(activities[j]);
    }
    if (keep_rows.empty() || keep_cols.empty())
        fail(ErrorCode::EmptyMatrix, "count matrix has no nonzero rows or columns");

    out.counts.resize(idx(keep_rows.size()), idx(keep_cols.size()));
    for (std::size_t i = 0; i < keep_rows.size(); ++i)
        for (std::size_t j = 0; j < keep_cols.size(); ++j)
            out.counts(idx(i), idx(j)) = counts(idx(keep_rows[i]), idx(keep_cols[j]));
    for (auto i : keep_rows) out.countries.push_back(countries[i]);
    for (auto j : keep_cols) out.activities.push_back(activities[j]);
    return out;
}

CountMatrix build_count_matrix(const ingest::YearlyCounts& y, int year) {
    std::map<std::string, std::size_t> country_ix, activity_ix;
    bool found = false;
    for (const auto& r : y.rows) {
        if (r.year != year) continue;
        found = true;
        country_ix.emplace(r.country, 0);
        activity_ix.emplace(r.language, 0);
    }
    if (!found) fail(ErrorCode::YearNotFound, "year " + std::to_string(year) + " not present in data");

    Labels countries, activities;
    for (auto& [name, i] : country_ix) {
        i = countries.size();
        countries.push_back(name);
    }
    for (auto& [name, j] : activity_ix) {
        j = activities.size();
        activities.push_back(name);
    }
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(idx(countries.size()), idx(activities.size()));
    for (const auto& r : y.rows)
        if (r.year == year) raw(idx(country_ix[r.country]), idx(activity_ix[r.language])) = r.developers;

    // Zero rows/columns are removed first so ordering totals refer to retained labels.
    CountMatrix trimmed = make_count_matrix(countries, activities, raw, year);

    std::vector<double> row_tot(trimmed.countries.size(), 0.0), col_tot(trimmed.activities.size(), 0.0);
    for (std::size_t i = 0; i < row_tot.size(); ++i)
        for (std::size_t j = 0; j < col_tot.size(); ++j) {
            row_tot[i] += trimmed.counts(idx(i), idx(j));
        }
    for (std::size_t j = 0; j < col_tot.size(); ++j)
        for (std::size_t i = 0; i < row_tot.size(); ++i) col_tot[j] += trimmed.counts(idx(i), idx(j));

    const auto ro = order_by_total(trimmed.countries, row_tot);
    const auto co = order_by_total(trimmed.activities, col_tot);
    CountMatrix out;
    out.year = year;
    out.dropped_countries = trimmed.dropped_countries;
    out.dropped_activities = trimmed.dropped_activities;
    out.counts.resize(idx(ro.size()), idx(co.size()));
    for (std::size_t i = 0; i < ro.size(); ++i) {
        out.countries.push_back(trimmed.countries[ro[i]]);
        for (std::size_t j = 0; j < co.size(); ++j)
            out.counts(idx(i), idx(j)) = trimmed.counts(idx(ro[i]), idx(co[j]));
    }
    for (auto j : co) out.activities.push_back(trimmed.activities[j]);
    return out;
}

RcaMatrix rca(const CountMatrix& x) {
    const auto nc = static_cast<std::size_t>(x.counts.rows());
    const auto nl = static_cast<std::size_t>(x.counts.cols());
    if (nc == 0 || nl == 0) fail(ErrorCode::EmptyMatrix, "rca: empty count matrix");

    std::vector<double> row_tot(nc, 0.0), col_tot(nl, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nl; ++j) row_tot[i] += x.counts(idx(i), idx(j));
    for (std::size_t j = 0; j < nl; ++j)
        for (std::size_t i = 0; i < nc; ++i) col_tot[j] += x.counts(idx(i), idx(j));
    for (double t : row_tot) grand += t;
    for (std::size_t i = 0; i < nc; ++i)
        if (row_tot[i] <= 0.0) fail(ErrorCode::EmptyMatrix, "rca: country '" + x.countries[i] + "' has zero total");
    for (std::size_t j = 0; j < nl; ++j)
        if (col_tot[j] <= 0.0) fail(ErrorCode::EmptyMatrix, "rca: activity '" + x.activities[j] + "' has zero total");

    RcaMatrix out{x.countries, x.activities, Eigen::MatrixXd(idx(nc), idx(nl)), x.year};
    parallel_for(nc, [&](std::size_t i) {
        for (std::size_t j = 0; j < nl; ++j)
            out.values(idx(i), idx(j)) = x.counts(idx(i), idx(j)) * grand / (row_tot[i] * col_tot[j]);
    });
    return out;
}

SpecializationMatrix binarize(const RcaMatrix& r, double threshold) {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        fail(ErrorCode::InvalidArgument, "binarize: threshold must be positive");
    Eigen::MatrixXd m(r.values.rows(), r.values.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = r.values(i, j) >= threshold ? 1.0 : 0.0;
    SpecializationMatrix out(r.countries, r.activities, std::move(m));
    out.require_nonempty_margins();
    return out;
}

Margins margins(const SpecializationMatrix& m) { return {m.diversity(), m.ubiquity()}; }

NestedOrder nested_sort(const SpecializationMatrix& m) {
    std::vector<double> div(m.diversity().begin(), m.diversity().end());
    std::vector<double> ubi(m.ubiquity().begin(), m.ubiquity().end());
    NestedOrder out;
    out.row_order = order_by_total(m.countries(), div);
    out.col_order = order_by_total(m.activities(), ubi);

    Labels rows, cols;
    Eigen::MatrixXd v(m.values().rows(), m.values().cols());
    for (std::size_t i = 0; i < out.row_order.size(); ++i) {
        rows.push_back(m.countries()[out.row_order[i]]);
        for (std::size_t j = 0; j < out.col_order.size(); ++j)
            v(idx(i), idx(j)) = m.values()(idx(out.row_order[i]), idx(out.col_order[j]));
    }
    for (auto j : out.col_order) cols.push_back(m.activities()[j]);
    out.matrix = SpecializationMatrix(std::move(rows), std::move(cols), std::move(v));
    return out;
}

LabeledMatrix to_labeled(const CountMatrix& x) { return {x.countries, x.activities, x.counts}; }
LabeledMatrix to_labeled(const RcaMatrix& r) { return {r.countries, r.activities, r.values}; }
LabeledMatrix to_labeled(const SpecializationMatrix& m) {
    return {m.countries(), m.activities(), m.values()};
}

RcaMatrix rca_from_labeled(LabeledMatrix m) {
    for (Index i = 0; i < m.values.rows(); ++i)
        for (Index j = 0; j < m.values.cols(); ++j)
            if (!std::isfinite(m.values(i, j)) || m.values(i, j) < 0.0)
                fail(ErrorCode::InvalidArgument, "rca matrix entries must be finite and >= 0");
    return {std::move(m.rows), std::move(m.cols), std::move(m.values), 0};
}

SpecializationMatrix specialization_from_labeled(LabeledMatrix m) {
    return SpecializationMatrix(std::move(m.rows), std::move(m.cols), std::move(m.values));
}

}  // namespace eclab::specialization
