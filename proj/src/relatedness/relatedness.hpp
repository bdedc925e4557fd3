#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specialization/specialization.hpp"

namespace eclab::relatedness {

// Symmetric activity-activity proximity; diagonal is 1.
struct ProximityMatrix {
    Labels activities;
    Eigen::MatrixXd values;
};

// Country-activity relatedness density in [0, 1].
struct DensityMatrix {
    Labels countries;
    Labels activities;
    Eigen::MatrixXd values;
};

struct DensityOptions {
    // Keep the l' = l term in numerator and denominator.
    bool include_self = true;
};

struct BackboneEdge {
    std::string source;  // lexicographically smaller label
    std::string target;
    double phi = 0.0;
    bool in_spanning_tree = false;
};

struct NetworkBackbone {
    Labels nodes;
    std::vector<BackboneEdge> edges;
    double threshold = 0.0;
    std::size_t components = 0;
    bool disconnected = false;  // spanning forest rather than tree
};

// phi(l, l') = co-occurrence / max(ubiquity_l, ubiquity_l'). Throws ZeroUbiquity.
ProximityMatrix proximity(const specialization::SpecializationMatrix& m);

// omega(c, l) = sum_l' M(c, l') phi(l, l') / sum_l' phi(l, l'). Throws ZeroDenominator.
DensityMatrix relatedness_density(const specialization::SpecializationMatrix& m,
                                  const ProximityMatrix& phi, const DensityOptions& opts = {});

// Maximum spanning tree over positive proximities plus every edge with phi >= threshold.
NetworkBackbone backbone(const ProximityMatrix& phi, double threshold);

// Upper triangle (diagonal included) as l1,l2,phi rows in label order.
std::string proximity_to_long_csv(const ProximityMatrix& phi);
ProximityMatrix proximity_from_long_csv(const std::string& text, const std::string& context);

std::string backbone_to_csv(const NetworkBackbone& b);
std::string backbone_to_dot(const NetworkBackbone& b);

LabeledMatrix to_labeled(const DensityMatrix& d);

}  // namespace eclab::relatedness
