#pragma once

#include <span>
#include <utility>
#include <vector>

#include "risknet/linalg.hpp"
#include "risknet/provisioning.hpp"

namespace risknet {

/// Bipartite SLA/component graph; components are links, indexed by LinkId.
struct MetaGraph {
    int n_components = 0;
    int n_slas = 0;
    std::vector<std::pair<int, int>> edges_working;  // (sla, component)
    std::vector<std::pair<int, int>> edges_backup;
    bool operator==(const MetaGraph&) const = default;
};

/// Edges ordered by SLA id, then LinkId.
MetaGraph build_metagraph(const Scenario& scenario);

inline constexpr int kComponentFeatures = 4;  // intensity, alpha, beta, backup capacity
inline constexpr int kSlaFeatures = 1;        // demand

struct FeatureSet {
    Matrix component_features;  // n_components x 4
    Matrix sla_features;        // n_slas x 1
};

/// Raw scenario parameters in the fixed column order.
FeatureSet extract_features(const Scenario& scenario);

struct NormStats {
    std::vector<double> component_mean, component_std;
    std::vector<double> sla_mean, sla_std;
    double label_mean = 0.0;
    double label_std = 1.0;
    bool operator==(const NormStats&) const = default;
};

inline constexpr double kStdFloor = 1e-8;

/// Column z-score statistics over every component / SLA row of the given
/// feature sets, plus one scalar pair over all label values. Population
/// standard deviation, floored at kStdFloor.
NormStats fit_normalizer(std::span<const FeatureSet> features, std::span<const double> labels);

FeatureSet normalize_features(const NormStats& stats, const FeatureSet& raw);
FeatureSet denormalize_features(const NormStats& stats, const FeatureSet& normalized);
double normalize_label(const NormStats& stats, double y);
double denormalize_label(const NormStats& stats, double z);

}  // namespace risknet
