#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "specialization/specialization.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eclab;
using eclab::testing::rca_oracle;
using namespace eclab::specialization;
using eclab::testing::make_labels;
using eclab::testing::make_m;

namespace {

CountMatrix counts_of(const Eigen::MatrixXd& x) {
    return make_count_matrix(make_labels(static_cast<std::size_t>(x.rows()), "c"),
                             make_labels(static_cast<std::size_t>(x.cols()), "a"), x);
}

}  // namespace

TEST(CountMatrix, PivotAndOrdering) {
    ingest::YearlyCounts y;
    y.rows = {{2020, "AA", "Go", 5}, {2020, "AA", "Rust", 1}, {2020, "BB", "Go", 2}, {2020, "BB", "Rust", 2},
              {2021, "CC", "Go", 9}};
    auto x = build_count_matrix(y, 2020);
    EXPECT_EQ(x.countries, (Labels{"AA", "BB"}));
    EXPECT_EQ(x.activities, (Labels{"Go", "Rust"}));
    EXPECT_DOUBLE_EQ(x.counts(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(x.counts(1, 1), 2.0);
}

TEST(CountMatrix, ZeroRowDroppedAndReported) {
    ingest::YearlyCounts y;
    y.rows = {{2020, "AA", "Go", 5}, {2020, "BB", "Go", 0}, {2020, "AA", "Rust", 1}};
    auto x = build_count_matrix(y, 2020);
    EXPECT_EQ(x.countries, (Labels{"AA"}));
    EXPECT_EQ(x.dropped_countries, (Labels{"BB"}));
}

TEST(CountMatrix, YearNotFound) {
    ingest::YearlyCounts y;
    y.rows = {{2020, "AA", "Go", 5}};
    try {
        build_count_matrix(y, 1999);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::YearNotFound);
    }
}

TEST(Rca, UniformIsOne) {
    auto r = rca(counts_of(Eigen::MatrixXd::Constant(3, 4, 7.0)));
    EXPECT_TRUE(r.values.isApproxToConstant(1.0, 1e-15));
    auto m = binarize(r);
    EXPECT_TRUE(m.values().isApproxToConstant(1.0));
}

TEST(Rca, HandExample) {
    Eigen::MatrixXd x(2, 2);
    x << 4, 0, 0, 1;
    auto r = rca(counts_of(x));
    EXPECT_DOUBLE_EQ(r.values(0, 0), 1.25);
    EXPECT_DOUBLE_EQ(r.values(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(r.values(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(r.values(1, 1), 5.0);
    auto m = binarize(r);
    EXPECT_EQ(m.values(), Eigen::MatrixXd::Identity(2, 2));
}

TEST(Rca, BruteForceRandom) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = eclab::testing::random_counts(8, 6, rng);
        auto r = rca(counts_of(x));
        EXPECT_LE((r.values - rca_oracle(x)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Rca, WeightedIdentityAndScaleInvariance) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = eclab::testing::random_counts(7, 9, rng);
        auto r = rca(counts_of(x)).values;
        const double grand = x.sum();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j) acc += r(i, j) * x.row(i).sum() * x.col(j).sum();
        EXPECT_NEAR(acc / (grand * grand), 1.0, 1e-9);

        auto scaled = rca(counts_of(x * 3.7)).values;
        EXPECT_LE((scaled - r).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Rca, DoublingOneRowMatchesOracle) {
    std::mt19937_64 rng(10);
    auto x = eclab::testing::random_counts(6, 5, rng);
    x.row(2) *= 2.0;
    EXPECT_LE((rca(counts_of(x)).values - rca_oracle(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Binarize, InclusiveThresholdAndMonotone) {
    RcaMatrix r{{"A", "B"}, {"x", "y"}, (Eigen::MatrixXd(2, 2) << 1.0, 0.5, 0.99, 3.0).finished(), 0};
    auto m = binarize(r);
    EXPECT_EQ(m.values()(0, 0), 1.0);
    EXPECT_EQ(m.values()(1, 0), 0.0);

    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        auto rr = rca(counts_of(eclab::testing::random_counts(10, 10, rng)));
        for (double t : {0.5, 0.8, 1.0, 1.2}) {
            Eigen::MatrixXd lo(rr.values.rows(), rr.values.cols()), hi = lo;
            for (Eigen::Index i = 0; i < lo.rows(); ++i)
                for (Eigen::Index j = 0; j < lo.cols(); ++j) {
                    lo(i, j) = rr.values(i, j) >= t;
                    hi(i, j) = rr.values(i, j) >= t + 0.3;
                }
            EXPECT_TRUE((hi.array() <= lo.array()).all());
        }
    }
}

TEST(Binarize, DegenerateWhenMarginEmpties) {
    RcaMatrix r{{"A", "B"}, {"x", "y"}, (Eigen::MatrixXd(2, 2) << 2.0, 0.5, 1.5, 0.2).finished(), 0};
    try {
        binarize(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateMatrix);
    }
    try {
        binarize(r, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
}

TEST(Margins, Examples) {
    auto nested = margins(make_m({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}}));
    EXPECT_EQ(nested.diversity, (std::vector<int>{3, 2, 1}));
    EXPECT_EQ(nested.ubiquity, (std::vector<int>{3, 2, 1}));

    auto id = margins(make_m({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
    EXPECT_EQ(id.diversity, std::vector<int>(4, 1));
    EXPECT_EQ(id.ubiquity, std::vector<int>(4, 1));

    auto ones = margins(make_m({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}));
    EXPECT_EQ(ones.diversity, std::vector<int>(3, 4));
    EXPECT_EQ(ones.ubiquity, std::vector<int>(4, 3));
}

TEST(Margins, SumsAgree) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        auto m = eclab::testing::random_m(9, 13, 0.4, rng);
        const int ones = static_cast<int>(m.values().sum());
        EXPECT_EQ(std::accumulate(m.diversity().begin(), m.diversity().end(), 0), ones);
        EXPECT_EQ(std::accumulate(m.ubiquity().begin(), m.ubiquity().end(), 0), ones);
    }
}

TEST(SpecializationMatrix, RejectsNonBinary) {
    EXPECT_THROW(make_m({{1, 2}, {0, 1}}), Error);
}

TEST(NestedSort, AlreadyNestedIsIdentity) {
    auto n = nested_sort(make_m({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}}));
    EXPECT_EQ(n.row_order, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(n.col_order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(NestedSort, ReversedRows) {
    auto n = nested_sort(make_m({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}}));
    EXPECT_EQ(n.row_order, (std::vector<std::size_t>{2, 1, 0}));
    EXPECT_EQ(n.col_order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(NestedSort, RandomRowSumsNonIncreasing) {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        auto m = eclab::testing::random_m(10, 10, 0.5, rng);
        auto n = nested_sort(m);
        // Independent ordering: stable sort of (diversity desc, label asc).
        std::vector<std::size_t> expect(10);
        std::iota(expect.begin(), expect.end(), 0);
        std::stable_sort(expect.begin(), expect.end(), [&](auto a, auto b) {
            return m.diversity()[a] > m.diversity()[b];
        });
        EXPECT_EQ(n.row_order, expect);
        const auto& d = n.matrix.diversity();
        EXPECT_TRUE(std::is_sorted(d.begin(), d.end(), std::greater<int>()));
        const auto& u = n.matrix.ubiquity();
        EXPECT_TRUE(std::is_sorted(u.begin(), u.end(), std::greater<int>()));
    }
}
