#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "common/error.hpp"
#include "econometrics/econometrics.hpp"
#include "ingest/ingest.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eclab;
using namespace eclab::econometrics;
using eclab::testing::sandwich;

namespace {

using Columns = std::vector<std::pair<std::string, std::vector<double>>>;

DataTable table(const Columns& cols) {
    DataTable t;
    for (const auto& [name, v] : cols) {
        std::vector<std::optional<double>> o(v.begin(), v.end());
        t.add_numeric(name, o);
    }
    return t;
}

ModelSpec spec(const std::string& y, const std::vector<std::string>& xs, SeType se = SeType::Robust,
               const std::string& cluster = "") {
    ModelSpec s;
    s.name = "m";
    s.outcome = {y, {}};
    for (const auto& x : xs) s.covariates.push_back({x, {}});
    s.se = {se, cluster};
    return s;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Internal;
}

void expect_psd(const Eigen::MatrixXd& cov) {
    EXPECT_LE((cov - cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
}

// Random regressors with an intercept column.
struct Sim {
    Eigen::MatrixXd x;  // includes intercept
    Eigen::VectorXd y;
    std::vector<std::string> groups;
    DataTable data;
};

Sim simulate(int n, int k, std::mt19937_64& rng, int n_groups = 0) {
    std::normal_distribution<double> nd;
    Sim s;
    s.x.resize(n, k + 1);
    s.y.resize(n);
    Columns cols;
    for (int j = 0; j < k; ++j) cols.push_back({"x" + std::to_string(j + 1), {}});
    std::vector<double> yv, gv;
    for (int i = 0; i < n; ++i) {
        s.x(i, 0) = 1.0;
        double y = 0.5;
        const double scale = 1.0 + std::abs(nd(rng));  // heteroskedastic noise
        for (int j = 0; j < k; ++j) {
            const double v = nd(rng);
            s.x(i, j + 1) = v;
            cols[static_cast<std::size_t>(j)].second.push_back(v);
            y += (j + 1) * 0.7 * v;
        }
        const int g = n_groups ? i % n_groups : 0;
        y += scale * nd(rng) + 0.3 * g;
        s.y(i) = y;
        yv.push_back(y);
        gv.push_back(g);
        s.groups.push_back(std::to_string(g));
    }
    cols.push_back({"y", yv});
    cols.push_back({"g", gv});
    s.data = table(cols);
    return s;
}

std::vector<std::string> xnames(int k) {
    std::vector<std::string> out;
    for (int j = 0; j < k; ++j) out.push_back("x" + std::to_string(j + 1));
    return out;
}

}  // namespace

TEST(Ols, ExactFit) {
    auto r = ols(spec("y", {"x"}), table({{"y", {1, 2, 3}}, {"x", {1, 2, 3}}}));
    EXPECT_NEAR(r.coef(r.index("x")), 1.0, 1e-12);
    EXPECT_NEAR(r.coef(r.index("(intercept)")), 0.0, 1e-12);
    EXPECT_NEAR(*r.r2, 1.0, 1e-12);
}

TEST(Ols, NormalEquationsAndSandwiches) {
    std::mt19937_64 rng(51);
    auto s = simulate(30, 3, rng, 6);
    const Eigen::VectorXd beta = (s.x.transpose() * s.x).ldlt().solve(s.x.transpose() * s.y);
    const Eigen::VectorXd u = s.y - s.x * beta;
    const double n = 30, k = 4, g = 6;

    auto classical = ols(spec("y", xnames(3), SeType::Classical), s.data);
    auto robust = ols(spec("y", xnames(3), SeType::Robust), s.data);
    auto clustered = ols(spec("y", xnames(3), SeType::Clustered, "g"), s.data);
    for (const auto* r : {&classical, &robust, &clustered}) {
        EXPECT_LE((r->coef - beta).cwiseAbs().maxCoeff(), 1e-10);
        expect_psd(r->cov);
        EXPECT_EQ(r->n, 30u);
        // Residuals orthogonal to every design column.
        EXPECT_LE((s.x.transpose() * r->residuals).cwiseAbs().maxCoeff(), 1e-8);
    }
    const Eigen::MatrixXd v_classical = (s.x.transpose() * s.x).inverse() * (u.squaredNorm() / (n - k));
    const Eigen::MatrixXd v_hc1 = sandwich(s.x, u, nullptr) * (n / (n - k));
    const Eigen::MatrixXd v_cr1 = sandwich(s.x, u, &s.groups) * ((g / (g - 1)) * ((n - 1) / (n - k)));
    EXPECT_LE((classical.cov - v_classical).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((robust.cov - v_hc1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((clustered.cov - v_cr1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(*clustered.clusters, 6u);
    EXPECT_DOUBLE_EQ(clustered.df, 5.0);
    EXPECT_DOUBLE_EQ(robust.df, 26.0);

    const double tss = (s.y.array() - s.y.mean()).square().sum();
    EXPECT_NEAR(*robust.r2, 1 - u.squaredNorm() / tss, 1e-12);
    EXPECT_NEAR(*robust.adj_r2, 1 - (1 - *robust.r2) * (n - 1) / (n - k), 1e-12);
}

TEST(Ols, SingletonClustersEqualHc1) {
    std::mt19937_64 rng(52);
    auto s = simulate(25, 2, rng);
    std::vector<double> ids(25);
    std::iota(ids.begin(), ids.end(), 0.0);
    s.data.add_numeric("id", std::vector<std::optional<double>>(ids.begin(), ids.end()));
    auto hc1 = ols(spec("y", xnames(2), SeType::Robust), s.data);
    auto cr1 = ols(spec("y", xnames(2), SeType::Clustered, "id"), s.data);
    // G = N makes (G/(G-1))((N-1)/(N-K)) collapse to N/(N-K).
    EXPECT_LE((hc1.se - cr1.se).cwiseAbs().maxCoeff(), 1e-12);
}

// Residuals of constant magnitude: HC1 and classical coincide.
TEST(Ols, HomoskedasticResidualsMakeHc1Classical) {
    std::vector<double> x, y;
    const double signs[] = {1, -1, -1, 1, 1, -1};
    for (int i = 0; i < 12; ++i) {
        const double xi = i < 6 ? 0.0 : 1.0;
        x.push_back(xi);
        y.push_back(2.0 + 3.0 * xi + 0.4 * signs[i % 6]);
    }
    auto data = table({{"x", x}, {"y", y}});
    auto classical = ols(spec("y", {"x"}, SeType::Classical), data);
    auto robust = ols(spec("y", {"x"}, SeType::Robust), data);
    for (Eigen::Index i = 0; i < classical.residuals.size(); ++i)
        EXPECT_NEAR(std::abs(classical.residuals(i)), 0.4, 1e-12);
    EXPECT_LE((classical.se - robust.se).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, DummyFixedEffectsEqualWithinTransform) {
    std::mt19937_64 rng(53);
    auto s = simulate(60, 2, rng, 5);
    auto sp = spec("y", xnames(2), SeType::Robust);
    sp.fixed_effects = {"g"};
    auto r = ols(sp, s.data);
    EXPECT_EQ(r.n_fe_dummies, 4u);
    EXPECT_TRUE(std::find(r.terms.begin(), r.terms.end(), "g=1") != r.terms.end());
    EXPECT_TRUE(std::find(r.terms.begin(), r.terms.end(), "g=0") == r.terms.end());

    // Demean within groups and regress without intercept.
    std::map<std::string, Eigen::VectorXd> sums;
    std::map<std::string, double> counts;
    Eigen::MatrixXd z(60, 3);
    z << s.x.rightCols(2), s.y;
    for (int i = 0; i < 60; ++i) {
        auto& acc = sums.try_emplace(s.groups[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(3)).first->second;
        acc += z.row(i).transpose();
        counts[s.groups[static_cast<std::size_t>(i)]] += 1;
    }
    for (int i = 0; i < 60; ++i) {
        const auto& gname = s.groups[static_cast<std::size_t>(i)];
        z.row(i) -= (sums[gname] / counts[gname]).transpose();
    }
    const Eigen::MatrixXd xw = z.leftCols(2);
    const Eigen::VectorXd bw = (xw.transpose() * xw).ldlt().solve(xw.transpose() * z.col(2));
    EXPECT_NEAR(r.coef(r.index("x1")), bw(0), 1e-8);
    EXPECT_NEAR(r.coef(r.index("x2")), bw(1), 1e-8);
    ASSERT_TRUE(r.within_r2.has_value());
    const Eigen::VectorXd uw = z.col(2) - xw * bw;
    EXPECT_NEAR(*r.within_r2, 1 - uw.squaredNorm() / z.col(2).squaredNorm(), 1e-10);
}

TEST(Ols, ListwiseDeletionAndTransforms) {
    DataTable t = DataTable::parse("y,x,w\n1,1,\n2,2,1\n3,4,2\n4,8,1\n5,16,3\n6,0,2\n");
    ModelSpec s = spec("y", {"x"});
    s.covariates[0].transforms = {Transform::Log};
    s.covariates.push_back({"w", {}});
    auto r = ols(s, t);
    // Row 1 lacks w, row 6 has log(0).
    EXPECT_EQ(r.n, 4u);
    EXPECT_EQ(r.rows_used, (std::vector<std::size_t>{1, 2, 3, 4}));
    EXPECT_EQ(r.terms[1], "log(x)");
    Term sq{"x", {Transform::Log, Transform::Square}};
    EXPECT_EQ(sq.label(), "log(x)^2");
}

TEST(Ols, RankDeficientNamesColumns) {
    auto t = table({{"y", {1, 2, 3, 5, 4}}, {"a", {1, 2, 3, 4, 5}}, {"b", {2, 4, 6, 8, 10}}});
    try {
        ols(spec("y", {"a", "b"}), t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
        // Either column of the collinear pair may be the one reported.
        const std::string msg = e.what();
        const auto tail = msg.substr(msg.find("collinear columns:"));
        EXPECT_TRUE(tail.find(" a") != std::string::npos || tail.find(" b") != std::string::npos) << msg;
    }
    auto empty = DataTable::parse("y,a\n,1\n2,\n");
    EXPECT_EQ(code_of([&] { ols(spec("y", {"a"}), empty); }), ErrorCode::EmptySample);
}

TEST(Ols, SampleFilter) {
    auto t = DataTable::parse(
        "y,x,population,exports_usd,patents\n1,1,2e6,2e9,5\n2,3,2e6,2e9,5\n3,2,5e5,2e9,5\n4,5,2e6,2e9,1\n"
        "5,4,2e6,2e9,4\n7,6,2e6,5e9,9\n");
    auto s = spec("y", {"x"});
    s.sample = SampleFilter{};
    EXPECT_EQ(ols(s, t).n, 4u);
}

TEST(Logit, SeparationAndNullModel) {
    EXPECT_EQ(code_of([] { logit(spec("y", {"x"}), table({{"y", {0, 1}}, {"x", {0, 1}}})); }),
              ErrorCode::PerfectSeparation);
    EXPECT_EQ(code_of([] { logit(spec("y", {"x"}), table({{"y", {0, 0, 0, 1, 1, 1}}, {"x", {1, 2, 3, 4, 5, 6}}})); }),
              ErrorCode::PerfectSeparation);
    EXPECT_EQ(code_of([] { logit(spec("y", {}), table({{"y", {1, 1, 1}}})); }), ErrorCode::ConstantSeries);

    auto r = logit(spec("y", {}), table({{"y", {0, 1, 1, 0, 1, 0, 0, 1}}}));
    EXPECT_NEAR(r.coef(0), 0.0, 1e-10);
    EXPECT_NEAR(*r.pseudo_r2, 0.0, 1e-12);
    auto r2 = logit(spec("y", {}), table({{"y", {0, 1, 1, 1}}}));
    EXPECT_NEAR(r2.coef(0), std::log(3.0), 1e-9);
}

TEST(Logit, MatchesLikelihoodSearchOracle) {
    std::mt19937_64 rng(54);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u;
    const int n = 50;
    std::vector<double> x1, x2, y;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd yv(n);
    for (int i = 0; i < n; ++i) {
        x1.push_back(nd(rng));
        x2.push_back(nd(rng));
        const double eta = -0.3 + 0.8 * x1.back() - 0.5 * x2.back();
        y.push_back(u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0);
        x.row(i) << 1, x1.back(), x2.back();
        yv(i) = y.back();
    }
    auto data = table({{"y", y}, {"x1", x1}, {"x2", x2}});
    auto r = logit(spec("y", {"x1", "x2"}, SeType::Classical), data);

    auto negll = [&](const Eigen::VectorXd& b) { return eclab::testing::logit_negll(x, yv, b); };
    const Eigen::VectorXd b = eclab::testing::logit_search(x, yv);
    EXPECT_LE((r.coef - b).cwiseAbs().maxCoeff(), 1e-4);

    // Score at the optimum.
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n; ++i) grad += x.row(i).transpose() * (yv(i) - 1 / (1 + std::exp(-x.row(i).dot(r.coef))));
    EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-6);

    const double ll = -negll(r.coef);
    const double ybar = yv.mean();
    const double ll0 = n * (ybar * std::log(ybar) + (1 - ybar) * std::log(1 - ybar));
    EXPECT_NEAR(*r.loglik, ll, 1e-9);
    EXPECT_NEAR(*r.pseudo_r2, 1 - ll / ll0, 1e-10);
    EXPECT_NEAR(*r.bic, -2 * ll + 3 * std::log(50.0), 1e-9);
    EXPECT_EQ(r.stat_kind, "z");
    expect_psd(r.cov);

    // Inverse information for classical; clustered sandwich with G/(G-1).
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd resid(n);
    for (int i = 0; i < n; ++i) {
        const double p = 1 / (1 + std::exp(-x.row(i).dot(r.coef)));
        info += p * (1 - p) * x.row(i).transpose() * x.row(i);
        resid(i) = yv(i) - p;
    }
    EXPECT_LE((r.cov - info.inverse()).cwiseAbs().maxCoeff(), 1e-8);
    std::vector<std::string> groups;
    std::vector<double> gv;
    for (int i = 0; i < n; ++i) {
        groups.push_back(std::to_string(i % 7));
        gv.push_back(i % 7);
    }
    data.add_numeric("g", std::vector<std::optional<double>>(gv.begin(), gv.end()));
    auto rc = logit(spec("y", {"x1", "x2"}, SeType::Clustered, "g"), data);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    std::map<std::string, Eigen::VectorXd> sums;
    for (int i = 0; i < n; ++i)
        sums.try_emplace(groups[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(3)).first->second +=
            resid(i) * x.row(i).transpose();
    for (const auto& [gname, sc] : sums) meat += sc * sc.transpose();
    const Eigen::MatrixXd cr = info.inverse() * meat * info.inverse() * (7.0 / 6.0);
    EXPECT_LE((rc.cov - cr).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Logit, FixedEffectsDropConstantGroups) {
    std::vector<double> y, x, g;
    std::mt19937_64 rng(55);
    std::normal_distribution<double> nd;
    for (int grp = 0; grp < 6; ++grp)
        for (int i = 0; i < 10; ++i) {
            g.push_back(grp);
            x.push_back(nd(rng));
            if (grp == 0) y.push_back(0);
            else if (grp == 1) y.push_back(1);
            else y.push_back((i + grp) % 3 == 0 ? 1 : 0);
        }
    auto sp = spec("y", {"x"}, SeType::Robust);
    sp.fixed_effects = {"g"};
    auto r = logit(sp, table({{"y", y}, {"x", x}, {"g", g}}));
    EXPECT_EQ(r.n, 40u);
    EXPECT_EQ(r.dropped_groups.size(), 2u);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Iv, InstrumentEqualToRegressorReproducesOls) {
    std::mt19937_64 rng(56);
    auto s = simulate(40, 2, rng);
    auto sp = spec("y", xnames(2), SeType::Robust);
    auto o = ols(sp, s.data);
    auto iv = tsls(sp, "x1", "x1", s.data);
    EXPECT_LE((iv.second_stage.coef - o.coef).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((iv.second_stage.se - o.se).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(iv.dwh_p, 1.0, 1e-12);
    EXPECT_EQ(iv.first_stage.n, iv.second_stage.n);
    EXPECT_TRUE(iv.second_stage.r2_nonstandard);
}

TEST(Iv, JustIdentifiedMatchesClosedForm) {
    std::mt19937_64 rng(57);
    std::normal_distribution<double> nd;
    const int n = 80;
    std::vector<double> y, x, w, z;
    for (int i = 0; i < n; ++i) {
        const double zi = nd(rng), e = nd(rng), wi = nd(rng);
        const double xi = 0.8 * zi + 0.6 * e + 0.2 * nd(rng);
        z.push_back(zi);
        w.push_back(wi);
        x.push_back(xi);
        y.push_back(1.0 + 2.0 * xi - 0.5 * wi + e);
    }
    auto data = table({{"y", y}, {"x", x}, {"w", w}, {"z", z}});
    auto iv = tsls(spec("y", {"x", "w"}, SeType::Robust), "x", "z", data);

    Eigen::MatrixXd X(n, 3), Z(n, 3);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
        X.row(i) << 1, x[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)];
        Z.row(i) << 1, z[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)];
        Y(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd b = (Z.transpose() * X).inverse() * (Z.transpose() * Y);
    EXPECT_LE((iv.second_stage.coef - b).cwiseAbs().maxCoeff(), 1e-10);

    // HC1 on the projected regressors with structural residuals.
    const Eigen::MatrixXd P = Z * (Z.transpose() * Z).inverse() * Z.transpose();
    const Eigen::MatrixXd Xh = P * X;
    const Eigen::VectorXd u = Y - X * b;
    const Eigen::MatrixXd v = sandwich(Xh, u, nullptr) * (n / (n - 3.0));
    EXPECT_LE((iv.second_stage.cov - v).cwiseAbs().maxCoeff(), 1e-10);

    // Weak-instrument F is the squared robust t on z in the first stage.
    const auto fs_idx = iv.first_stage.index("z");
    EXPECT_NEAR(iv.weak_instrument_f, std::pow(iv.first_stage.stat(fs_idx), 2), 1e-9);
    EXPECT_GT(iv.weak_instrument_f, 10.0);
    EXPECT_FALSE(iv.weak_instrument_warning);
    // Shared error component: the control function should pick it up.
    EXPECT_LT(iv.dwh_p, 0.05);
}

TEST(Iv, NoiseInstrumentWarns) {
    std::mt19937_64 rng(58);
    std::normal_distribution<double> nd;
    std::vector<double> y, x, z;
    for (int i = 0; i < 200; ++i) {
        const double xi = nd(rng);
        x.push_back(xi);
        z.push_back(nd(rng));
        y.push_back(xi + nd(rng));
    }
    auto iv = tsls(spec("y", {"x"}), "x", "z", table({{"y", y}, {"x", x}, {"z", z}}));
    EXPECT_LT(iv.weak_instrument_f, 10.0);
    EXPECT_TRUE(iv.weak_instrument_warning);
    ASSERT_FALSE(iv.second_stage.warnings.empty());
    EXPECT_NE(iv.second_stage.warnings[0].find("WeakInstrument"), std::string::npos);
}

TEST(Iv, EndogenousMustBeCovariate) {
    auto t = table({{"y", {1, 2, 3, 4}}, {"x", {1, 3, 2, 4}}, {"z", {2, 1, 4, 3}}});
    EXPECT_EQ(code_of([&] { tsls(spec("y", {"x"}), "q", "z", t); }), ErrorCode::InvalidArgument);
}

TEST(Instrument, IdenticalPairAndNeighborDrop) {
    auto m = eclab::testing::make_m({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}});
    complexity::ComplexityScores sc;
    sc.countries = m.countries();
    sc.eci_z = {0.7, -0.2, 1.1};
    ingest::NeighborGraph none;
    auto r = build_similarity_instrument(sc, m, none, 1);
    EXPECT_DOUBLE_EQ(r.values.at("c000"), -0.2);
    EXPECT_DOUBLE_EQ(r.values.at("c001"), 0.7);
    // c002 shares nothing with anyone.
    EXPECT_EQ(r.dropped, (std::vector<std::string>{"c002"}));

    ingest::NeighborGraph g;
    g.add("c000", "c001");
    auto r2 = build_similarity_instrument(sc, m, g, 1);
    EXPECT_EQ(r2.values.count("c000"), 0u);
    EXPECT_EQ(r2.dropped.size(), 3u);
}

TEST(Instrument, TopKMatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(59);
    for (int rep = 0; rep < 20; ++rep) {
        auto m = eclab::testing::random_m(6, 7, 0.5, rng);
        complexity::ComplexityScores sc;
        sc.countries = m.countries();
        std::normal_distribution<double> nd;
        for (std::size_t i = 0; i < 6; ++i) sc.eci_z.push_back(nd(rng));
        ingest::NeighborGraph g;
        g.add("c000", "c003");
        g.add("c001", "c002");
        auto r = build_similarity_instrument(sc, m, g, 3);
        const auto& v = m.values();
        for (std::size_t c = 0; c < 6; ++c) {
            std::vector<std::pair<double, std::size_t>> sims;
            for (std::size_t o = 0; o < 6; ++o) {
                if (o == c || g.are_neighbors(m.countries()[c], m.countries()[o])) continue;
                double co = 0;
                for (Eigen::Index l = 0; l < 7; ++l)
                    co += v(static_cast<Eigen::Index>(c), l) * v(static_cast<Eigen::Index>(o), l);
                const double sim = co / std::max(m.diversity()[c], m.diversity()[o]);
                if (sim > 0) sims.emplace_back(-sim, o);
            }
            std::sort(sims.begin(), sims.end());
            const auto& name = m.countries()[c];
            if (sims.empty()) {
                EXPECT_EQ(r.values.count(name), 0u);
                continue;
            }
            double mean = 0;
            std::vector<std::string> peers;
            const auto take = std::min<std::size_t>(3, sims.size());
            for (std::size_t i = 0; i < take; ++i) {
                mean += sc.eci_z[sims[i].second] / static_cast<double>(take);
                peers.push_back(m.countries()[sims[i].second]);
            }
            EXPECT_EQ(r.peers.at(name), peers);
            EXPECT_NEAR(r.values.at(name), mean, 1e-12);
        }
    }
}

TEST(Stars, Thresholds) {
    EXPECT_EQ(significance_stars(0.2), "");
    EXPECT_EQ(significance_stars(0.09), "*");
    EXPECT_EQ(significance_stars(0.049), "**");
    EXPECT_EQ(significance_stars(0.001), "***");
}

TEST(ModelSpecJson, ParsesAndValidates) {
    auto s = model_spec_from_json(nlohmann::json::parse(R"js({
        "name": "t1", "outcome": "gdp_pc:log",
        "covariates": ["eci", {"column": "gdp_pc", "transforms": ["log", "square"]}],
        "fixed_effects": ["country"], "se": "clustered(country)", "sample": true})js"));
    EXPECT_EQ(s.outcome.label(), "log(gdp_pc)");
    ASSERT_EQ(s.covariates.size(), 2u);
    EXPECT_EQ(s.covariates[1].label(), "log(gdp_pc)^2");
    EXPECT_EQ(s.se.type, SeType::Clustered);
    EXPECT_EQ(s.se.cluster, "country");
    EXPECT_TRUE(s.sample.has_value());
    auto round = model_spec_from_json(to_json(s));
    EXPECT_EQ(to_json(round), to_json(s));

    EXPECT_EQ(code_of([] { model_spec_from_json(nlohmann::json::parse(R"({"outcome": "y", "bogus": 1})")); }),
              ErrorCode::Validation);
    EXPECT_EQ(code_of([] { model_spec_from_json(nlohmann::json::parse(R"({"covariates": []})")); }),
              ErrorCode::Validation);
}

TEST(ModelGrid, GridShapeAndDesigns) {
    std::mt19937_64 rng(60);
    std::normal_distribution<double> nd;
    std::vector<std::string> cells_country;
    Columns cols = {{"gdp_pc", {}},      {"population", {}},   {"natural_resources", {}}, {"gini_avg", {}},
                    {"emissions_per_gdp", {}}, {"eci_software", {}}, {"eci_software_iv", {}},
                    {"eci_trade", {}},   {"eci_tech", {}},     {"eci_research", {}}};
    for (int i = 0; i < 40; ++i) {
        cells_country.push_back("C" + std::to_string(i));
        const double cap = nd(rng);
        cols[0].second.push_back(std::exp(9 + cap + 0.3 * nd(rng)));
        cols[1].second.push_back(std::exp(16 + nd(rng)));
        cols[2].second.push_back(std::exp(-3 + 0.5 * nd(rng)));
        cols[3].second.push_back(40 - 3 * cap + nd(rng));
        cols[4].second.push_back(0.4 - 0.05 * cap + 0.02 * nd(rng));
        cols[5].second.push_back(cap + 0.3 * nd(rng));
        cols[6].second.push_back(cap + 0.5 * nd(rng));
        for (int j = 7; j < 10; ++j) cols[static_cast<std::size_t>(j)].second.push_back(cap + 0.4 * nd(rng));
    }
    DataTable countries;
    countries.add_column("country", cells_country);
    for (const auto& [name, v] : cols)
        countries.add_numeric(name, std::vector<std::optional<double>>(v.begin(), v.end()));

    DataTable tr;
    std::vector<std::string> c_cells, a_cells;
    std::vector<std::optional<double>> outcome, density, ubiquity;
    std::bernoulli_distribution coin(0.3);
    for (int c = 0; c < 15; ++c)
        for (int a = 0; a < 8; ++a) {
            c_cells.push_back("C" + std::to_string(c));
            a_cells.push_back("L" + std::to_string(a));
            density.push_back(std::abs(nd(rng)) / 3);
            ubiquity.push_back(a - 3.5);
            outcome.push_back(coin(rng) ? 1.0 : 0.0);
        }
    tr.add_column("country", c_cells);
    tr.add_column("activity", a_cells);
    tr.add_numeric("outcome", outcome);
    tr.add_numeric("density", density);
    tr.add_numeric("ubiquity", ubiquity);

    auto bundle = run_model_grid(&countries, &tr, &tr);
    std::map<std::string, std::size_t> shape;
    for (const auto& t : bundle.json["tables"]) shape[t["id"].get<std::string>()] = t["columns"].size();
    EXPECT_EQ(shape.at("table1"), 8u);
    EXPECT_EQ(shape.at("table2"), 8u);
    EXPECT_EQ(shape.at("table3"), 8u);
    EXPECT_EQ(shape.at("table4"), 7u);
    EXPECT_EQ(shape.at("table5"), 7u);
    EXPECT_EQ(shape.count("tableS2"), 1u);
    EXPECT_EQ(shape.count("tableS5"), 1u);

    const auto& t1c1 = bundle.json["tables"][0]["columns"][0];
    EXPECT_EQ(t1c1["spec"]["outcome"]["transforms"], nlohmann::json::array({"log"}));
    std::vector<std::string> covs;
    for (const auto& c : t1c1["spec"]["covariates"]) covs.push_back(c["column"]);
    EXPECT_EQ(covs, (std::vector<std::string>{"eci_software", "population", "natural_resources"}));
    EXPECT_EQ(t1c1["spec"]["se"]["type"], "robust");

    bool found_fe = false;
    for (const auto& t : bundle.json["tables"])
        if (t["id"] == "table4") {
            const auto& c4 = t["columns"][3]["spec"];
            EXPECT_EQ(c4["fixed_effects"], nlohmann::json::array({"country", "activity"}));
            EXPECT_EQ(c4["se"]["type"], "clustered");
            found_fe = true;
        }
    EXPECT_TRUE(found_fe);
    EXPECT_NE(bundle.text.find("* p<0.1, ** p<0.05, *** p<0.01"), std::string::npos);
}
