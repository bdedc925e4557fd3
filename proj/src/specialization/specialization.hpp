#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "common/matrix_io.hpp"
#include "ingest/ingest.hpp"

namespace eclab::specialization {

// Nonnegative country x activity developer counts for one period.
// No row or column is all-zero; such labels are moved to the dropped lists.
struct CountMatrix {
    Labels countries;
    Labels activities;
    Eigen::MatrixXd counts;
    int year = 0;
    Labels dropped_countries;
    Labels dropped_activities;
};

struct RcaMatrix {
    Labels countries;
    Labels activities;
    Eigen::MatrixXd values;
    int year = 0;
};

// Binary specialization matrix with exact integer margins.
class SpecializationMatrix {
public:
    SpecializationMatrix() = default;
    // Throws InvalidArgument if dimensions disagree or an entry is not 0/1.
    SpecializationMatrix(Labels countries, Labels activities, Eigen::MatrixXd values);

    const Labels& countries() const noexcept { return countries_; }
    const Labels& activities() const noexcept { return activities_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    std::size_t n_countries() const noexcept { return countries_.size(); }
    std::size_t n_activities() const noexcept { return activities_.size(); }
    bool at(std::size_t c, std::size_t l) const {
        return values_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l)) != 0.0;
    }

    const std::vector<int>& diversity() const noexcept { return diversity_; }
    const std::vector<int>& ubiquity() const noexcept { return ubiquity_; }

    // Throws DegenerateMatrix when any country or activity has an empty margin.
    void require_nonempty_margins() const;

private:
    Labels countries_;
    Labels activities_;
    Eigen::MatrixXd values_;
    std::vector<int> diversity_;
    std::vector<int> ubiquity_;
};

struct Margins {
    std::vector<int> diversity;
    std::vector<int> ubiquity;
};

struct NestedOrder {
    SpecializationMatrix matrix;
    // Original index placed at each new position.
    std::vector<std::size_t> row_order;
    std::vector<std::size_t> col_order;
};

// Validates counts and drops all-zero rows/columns, keeping the given label order.
CountMatrix make_count_matrix(Labels countries, Labels activities, Eigen::MatrixXd counts,
                              int year = 0);

// Long-to-wide pivot of one year; labels ordered by descending total, ties lexicographic.
CountMatrix build_count_matrix(const ingest::YearlyCounts& y, int year);

RcaMatrix rca(const CountMatrix& x);

SpecializationMatrix binarize(const RcaMatrix& r, double threshold = 1.0);

Margins margins(const SpecializationMatrix& m);

NestedOrder nested_sort(const SpecializationMatrix& m);

LabeledMatrix to_labeled(const CountMatrix& x);
LabeledMatrix to_labeled(const RcaMatrix& r);
LabeledMatrix to_labeled(const SpecializationMatrix& m);
RcaMatrix rca_from_labeled(LabeledMatrix m);
SpecializationMatrix specialization_from_labeled(LabeledMatrix m);

}  // namespace eclab::specialization
