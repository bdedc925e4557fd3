#include "relatedness/relatedness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/parallel.hpp"

namespace eclab::relatedness {

using specialization::SpecializationMatrix;
using Eigen::Index;

namespace {
Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string dot_id(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}
}  // namespace

ProximityMatrix proximity(const SpecializationMatrix& m) {
    const auto nl = m.n_activities();
    const auto nc = m.n_countries();
    for (std::size_t l = 0; l < nl; ++l)
        if (m.ubiquity()[l] == 0)
            fail(ErrorCode::ZeroUbiquity, "activity '" + m.activities()[l] + "' has zero ubiquity");

    ProximityMatrix out{m.activities(), Eigen::MatrixXd(idx(nl), idx(nl))};
    parallel_for(nl, [&](std::size_t a) {
        for (std::size_t b = a; b < nl; ++b) {
            double co = 0.0;
            for (std::size_t c = 0; c < nc; ++c)
                if (m.at(c, a) && m.at(c, b)) co += 1.0;
            const double denom = static_cast<double>(std::max(m.ubiquity()[a], m.ubiquity()[b]));
            out.values(idx(a), idx(b)) = co / denom;
        }
    });
    for (std::size_t a = 0; a < nl; ++a)
        for (std::size_t b = 0; b < a; ++b) out.values(idx(a), idx(b)) = out.values(idx(b), idx(a));
    return out;
}

DensityMatrix relatedness_density(const SpecializationMatrix& m, const ProximityMatrix& phi,
                                  const DensityOptions& opts) {
    const auto nl = m.n_activities();
    const auto nc = m.n_countries();
    if (phi.activities != m.activities())
        fail(ErrorCode::InvalidArgument, "density: proximity labels do not match the specialization matrix");

    std::vector<double> denom(nl, 0.0);
    for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t k = 0; k < nl; ++k) {
            if (k == l && !opts.include_self) continue;
            denom[l] += phi.values(idx(l), idx(k));
        }
        if (!(denom[l] > 0.0))
            fail(ErrorCode::ZeroDenominator, "activity '" + m.activities()[l] + "' has zero total proximity");
    }

    DensityMatrix out{m.countries(), m.activities(), Eigen::MatrixXd(idx(nc), idx(nl))};
    parallel_for(nc, [&](std::size_t c) {
        for (std::size_t l = 0; l < nl; ++l) {
            double num = 0.0;
            for (std::size_t k = 0; k < nl; ++k) {
                if (k == l && !opts.include_self) continue;
                if (m.at(c, k)) num += phi.values(idx(l), idx(k));
            }
            out.values(idx(c), idx(l)) = num / denom[l];
        }
    });
    return out;
}

NetworkBackbone backbone(const ProximityMatrix& phi, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        fail(ErrorCode::InvalidArgument, "backbone threshold must lie in [0, 1]");
    const auto n = phi.activities.size();
    const auto& lab = phi.activities;

    struct Candidate {
        std::size_t a, b;  // lab[a] < lab[b]
        double phi;
    };
    std::vector<Candidate> cand;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = phi.values(idx(i), idx(j));
            if (w > 0.0) {
                if (lab[i] < lab[j]) cand.push_back({i, j, w});
                else cand.push_back({j, i, w});
            }
        }
    std::sort(cand.begin(), cand.end(), [&](const Candidate& x, const Candidate& y) {
        if (x.phi != y.phi) return x.phi > y.phi;
        if (lab[x.a] != lab[y.a]) return lab[x.a] < lab[y.a];
        return lab[x.b] < lab[y.b];
    });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    NetworkBackbone out;
    out.nodes = lab;
    out.threshold = threshold;
    std::size_t tree_edges = 0;
    for (const auto& e : cand) {
        const auto ra = find(e.a), rb = find(e.b);
        const bool in_tree = ra != rb;
        if (in_tree) {
            parent[ra] = rb;
            ++tree_edges;
        }
        if (in_tree || e.phi >= threshold)
            out.edges.push_back({lab[e.a], lab[e.b], e.phi, in_tree});
    }
    out.components = n - tree_edges;
    out.disconnected = out.components > 1;
    return out;
}

std::string proximity_to_long_csv(const ProximityMatrix& phi) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"l1", "l2", "phi"});
    const auto n = phi.activities.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            w.row({phi.activities[i], phi.activities[j], csv::format_double(phi.values(idx(i), idx(j)))});
    return out.str();
}

ProximityMatrix proximity_from_long_csv(const std::string& text, const std::string& context) {
    const auto doc = csv::parse(text);
    const auto c1 = doc.require_column("l1", context);
    const auto c2 = doc.require_column("l2", context);
    const auto cp = doc.require_column("phi", context);

    ProximityMatrix out;
    std::map<std::string, std::size_t> index;
    struct Entry {
        std::size_t a, b;
        double v;
    };
    std::vector<Entry> entries;
    auto intern = [&](const std::string& s) {
        auto [it, inserted] = index.emplace(s, out.activities.size());
        if (inserted) out.activities.push_back(s);
        return it->second;
    };
    for (const auto& rec : doc.records) {
        if (rec.fields.size() != doc.header.size())
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) + ": wrong field count");
        auto v = csv::parse_double(rec.fields[cp]);
        if (!v || *v < 0.0 || *v > 1.0)
            fail(ErrorCode::UnparsableRow, context + ": line " + std::to_string(rec.line) + ": phi must be in [0, 1]");
        const auto a = intern(std::string(csv::trim(rec.fields[c1])));
        const auto b = intern(std::string(csv::trim(rec.fields[c2])));
        entries.push_back({a, b, *v});
    }
    const auto n = out.activities.size();
    out.values = Eigen::MatrixXd::Zero(idx(n), idx(n));
    for (std::size_t i = 0; i < n; ++i) out.values(idx(i), idx(i)) = 1.0;
    for (const auto& e : entries) {
        out.values(idx(e.a), idx(e.b)) = e.v;
        out.values(idx(e.b), idx(e.a)) = e.v;
    }
    return out;
}

std::string backbone_to_csv(const NetworkBackbone& b) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"source", "target", "phi", "in_spanning_tree"});
    for (const auto& e : b.edges)
        w.row({e.source, e.target, csv::format_double(e.phi), e.in_spanning_tree ? "1" : "0"});
    return out.str();
}

std::string backbone_to_dot(const NetworkBackbone& b) {
    std::ostringstream out;
    out << "graph backbone {\n";
    for (const auto& n : b.nodes) out << "  " << dot_id(n) << ";\n";
    for (const auto& e : b.edges) {
        out << "  " << dot_id(e.source) << " -- " << dot_id(e.target) << " [weight="
            << csv::format_double(e.phi) << (e.in_spanning_tree ? ", tree=true" : ", tree=false, style=dashed")
            << "];\n";
    }
    out << "}\n";
    return out.str();
}

LabeledMatrix to_labeled(const DensityMatrix& d) { return {d.countries, d.activities, d.values}; }

}  // namespace eclab::relatedness
