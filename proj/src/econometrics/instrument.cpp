#include <algorithm>
#include <map>

#include "common/error.hpp"
#include "econometrics/econometrics.hpp"

namespace eclab::econometrics {

InstrumentResult build_similarity_instrument(const complexity::ComplexityScores& scores,
                                             const specialization::SpecializationMatrix& m,
                                             const ingest::NeighborGraph& g, int k) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "instrument peer count must be >= 1");
    std::map<std::string, double> eci;
    for (std::size_t i = 0; i < scores.countries.size(); ++i) eci[scores.countries[i]] = scores.eci_z[i];

    const auto& countries = m.countries();
    const auto& div = m.diversity();
    const Eigen::MatrixXd co = m.values() * m.values().transpose();

    InstrumentResult out;
    for (std::size_t c = 0; c < countries.size(); ++c) {
        if (!eci.count(countries[c])) continue;
        std::vector<std::pair<double, std::string>> cand;
        for (std::size_t o = 0; o < countries.size(); ++o) {
            if (o == c || !eci.count(countries[o]) || g.are_neighbors(countries[c], countries[o])) continue;
            const double denom = std::max(div[c], div[o]);
            if (denom <= 0) continue;
            const double sim = co(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(o)) / denom;
            if (sim > 0.0) cand.emplace_back(sim, countries[o]);
        }
        if (cand.empty()) {
            out.dropped.push_back(countries[c]);
            continue;
        }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const auto take = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(k));
        double s = 0.0;
        auto& peers = out.peers[countries[c]];
        for (std::size_t i = 0; i < take; ++i) {
            peers.push_back(cand[i].second);
            s += eci[cand[i].second];
        }
        out.values[countries[c]] = s / static_cast<double>(take);
    }
    return out;
}

}  // namespace eclab::econometrics
