#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "relatedness/relatedness.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eclab;
using eclab::testing::omega_oracle;
using eclab::testing::phi_oracle;
using namespace eclab::relatedness;
using eclab::testing::make_m;

namespace {

// Best spanning-tree weight by exhaustive search over edge subsets of size n-1.
double best_tree_weight(const Eigen::MatrixXd& phi) {
    const int n = static_cast<int>(phi.rows());
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (phi(a, b) > 0) edges.emplace_back(a, b);
    double best = -1.0;
    const int e = static_cast<int>(edges.size());
    for (long mask = 0; mask < (1L << e); ++mask) {
        if (__builtin_popcountl(static_cast<unsigned long>(mask)) != n - 1) continue;
        std::vector<int> parent(static_cast<std::size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        bool acyclic = true;
        double w = 0.0;
        for (int i = 0; i < e && acyclic; ++i)
            if (mask & (1L << i)) {
                int a = find(edges[i].first), b = find(edges[i].second);
                if (a == b) acyclic = false;
                parent[a] = b;
                w += phi(edges[i].first, edges[i].second);
            }
        if (acyclic) best = std::max(best, w);
    }
    return best;
}

ProximityMatrix phi_of(const std::vector<std::string>& labels, const Eigen::MatrixXd& v) {
    return {labels, v};
}

}  // namespace

TEST(Proximity, HandExamples) {
    auto phi = proximity(make_m({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}})).values;
    EXPECT_DOUBLE_EQ(phi(0, 1), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(phi(0, 2), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(phi(1, 2), 0.5);
    EXPECT_EQ(phi.diagonal(), Eigen::VectorXd::Ones(3));

    auto half = proximity(make_m({{1, 1}, {1, 1}, {0, 1}})).values;
    EXPECT_DOUBLE_EQ(half(0, 1), 2.0 / 3.0);

    auto ident = proximity(make_m({{1, 1, 0}, {1, 1, 1}})).values;
    EXPECT_DOUBLE_EQ(ident(0, 1), 1.0);
    auto disjoint = proximity(make_m({{1, 0}, {0, 1}})).values;
    EXPECT_DOUBLE_EQ(disjoint(0, 1), 0.0);
}

TEST(Proximity, ZeroUbiquity) {
    specialization::SpecializationMatrix m({"A", "B"}, {"x", "y"}, (Eigen::MatrixXd(2, 2) << 1, 0, 1, 0).finished());
    try {
        proximity(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroUbiquity);
    }
}

TEST(Proximity, BruteForceAndInvariants) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        auto m = eclab::testing::random_m(12, 9, 0.4, rng);
        auto phi = proximity(m).values;
        EXPECT_LE((phi - phi_oracle(m.values())).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(phi, phi.transpose());
        EXPECT_GE(phi.minCoeff(), 0.0);
        EXPECT_LE(phi.maxCoeff(), 1.0);

        // Shuffling countries leaves phi unchanged.
        std::vector<Eigen::Index> rp(12);
        std::iota(rp.begin(), rp.end(), 0);
        std::shuffle(rp.begin(), rp.end(), rng);
        Eigen::MatrixXd pv(12, 9);
        for (Eigen::Index i = 0; i < 12; ++i) pv.row(i) = m.values().row(rp[i]);
        specialization::SpecializationMatrix pm(m.countries(), m.activities(), pv);
        EXPECT_EQ(proximity(pm).values, phi);
    }
}

TEST(Density, HandExamples) {
    auto m = make_m({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}});
    auto phi = proximity(m);
    auto w = relatedness_density(m, phi).values;
    EXPECT_NEAR(w(2, 1), 4.0 / 13.0, 1e-15);
    EXPECT_TRUE(w.row(0).isApproxToConstant(1.0));

    auto m2 = make_m({{1, 1, 1}, {0, 0, 0}, {1, 0, 1}, {0, 1, 0}});
    auto w2 = relatedness_density(m2, proximity(m2)).values;
    EXPECT_TRUE(w2.row(1).isZero());
}

TEST(Density, BruteForceRangeAndMonotone) {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> pick_c(0, 9), pick_l(0, 7);
    for (int rep = 0; rep < 30; ++rep) {
        auto m = eclab::testing::random_m(10, 8, 0.45, rng);
        auto phi = proximity(m);
        for (bool self : {true, false}) {
            auto w = relatedness_density(m, phi, {self}).values;
            EXPECT_LE((w - omega_oracle(m.values(), phi.values, self)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GE(w.minCoeff(), 0.0);
            EXPECT_LE(w.maxCoeff(), 1.0);
        }
        // Adding one specialization never lowers any omega (phi held fixed).
        Eigen::MatrixXd more = m.values();
        more(pick_c(rng), pick_l(rng)) = 1.0;
        specialization::SpecializationMatrix mm(m.countries(), m.activities(), more);
        auto before = relatedness_density(m, phi).values;
        auto after = relatedness_density(mm, phi).values;
        EXPECT_TRUE((after.array() >= before.array() - 1e-15).all());
    }
}

TEST(Backbone, KruskalByHand) {
    Eigen::MatrixXd v(3, 3);
    v << 1, 0.9, 0.8, 0.9, 1, 0.1, 0.8, 0.1, 1;
    auto b = backbone(phi_of({"l1", "l2", "l3"}, v), 0.95);
    ASSERT_EQ(b.edges.size(), 2u);
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& e : b.edges) {
        EXPECT_TRUE(e.in_spanning_tree);
        got.emplace(e.source, e.target);
    }
    EXPECT_EQ(got, (std::set<std::pair<std::string, std::string>>{{"l1", "l2"}, {"l1", "l3"}}));
    EXPECT_FALSE(b.disconnected);
}

TEST(Backbone, ThresholdZeroKeepsAllPositiveEdges) {
    Eigen::MatrixXd v(4, 4);
    v << 1, 0.9, 0.2, 0.0, 0.9, 1, 0.3, 0.4, 0.2, 0.3, 1, 0.5, 0.0, 0.4, 0.5, 1;
    auto b = backbone(phi_of({"a", "b", "c", "d"}, v), 0.0);
    EXPECT_EQ(b.edges.size(), 5u);
}

TEST(Backbone, EqualWeightsTieBreakIsStable) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(4, 4, 0.3);
    v.diagonal().setOnes();
    auto b1 = backbone(phi_of({"d", "c", "b", "a"}, v), 0.9);
    auto b2 = backbone(phi_of({"d", "c", "b", "a"}, v), 0.9);
    EXPECT_EQ(backbone_to_csv(b1), backbone_to_csv(b2));
    // Kruskal on lexicographic edge order picks (a,b), (a,c), (a,d).
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& e : b1.edges) got.emplace(e.source, e.target);
    EXPECT_EQ(got, (std::set<std::pair<std::string, std::string>>{{"a", "b"}, {"a", "c"}, {"a", "d"}}));
}

TEST(Backbone, DisconnectedIsFlagged) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(4, 4);
    v(0, 1) = v(1, 0) = 0.5;
    v(2, 3) = v(3, 2) = 0.5;
    auto b = backbone(phi_of({"a", "b", "c", "d"}, v), 0.9);
    EXPECT_TRUE(b.disconnected);
    EXPECT_EQ(b.components, 2u);
    EXPECT_EQ(b.edges.size(), 2u);
}

TEST(Backbone, TreeIsMaximalAgainstEnumeration) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 3; n <= 6; ++n)
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) v(a, b) = v(b, a) = std::round(u(rng) * 18) / 20 + 0.05;
            auto labels = eclab::testing::make_labels(static_cast<std::size_t>(n), "l");
            auto b = backbone(phi_of(labels, v), 1.0);
            double w = 0.0;
            std::size_t tree = 0;
            for (const auto& e : b.edges)
                if (e.in_spanning_tree) {
                    ++tree;
                    w += e.phi;
                }
            EXPECT_EQ(tree, static_cast<std::size_t>(n - 1));
            EXPECT_NEAR(w, best_tree_weight(v), 1e-12);
        }
}

TEST(Backbone, ThresholdRange) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(backbone(phi_of({"a", "b"}, v), 1.5), Error);
}

TEST(ProximityCsv, RoundTrip) {
    std::mt19937_64 rng(34);
    auto phi = proximity(eclab::testing::random_m(8, 6, 0.5, rng));
    auto text = proximity_to_long_csv(phi);
    auto back = proximity_from_long_csv(text, "phi");
    EXPECT_EQ(back.activities, phi.activities);
    EXPECT_LE((back.values - phi.values).cwiseAbs().maxCoeff(), 0.0);
}
