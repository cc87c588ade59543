#include "risknet/metagraph.hpp"

#include <algorithm>
#include <cmath>

#include "risknet/error.hpp"

namespace risknet {

MetaGraph build_metagraph(const Scenario& scenario) {
    MetaGraph g;
    g.n_components = scenario.topology.n_links();
    g.n_slas = static_cast<int>(scenario.slas.size());
    for (const Sla& sla : scenario.slas) {
        Path w = sla.working, b = sla.backup;
        std::sort(w.begin(), w.end());
        std::sort(b.begin(), b.end());
        for (LinkId l : w) g.edges_working.emplace_back(sla.id, l);
        for (LinkId l : b) g.edges_backup.emplace_back(sla.id, l);
    }
    return g;
}

FeatureSet extract_features(const Scenario& scenario) {
    const Topology& t = scenario.topology;
    FeatureSet f;
    f.component_features.resize(t.n_links(), kComponentFeatures);
    for (const Link& l : t.links()) {
        const auto& rel = scenario.reliability.at(static_cast<std::size_t>(l.id));
        f.component_features.row(l.id) << rel.lambda_per_year, rel.pareto_alpha, rel.pareto_beta_h,
            l.backup_capacity;
    }
    f.sla_features.resize(static_cast<Eigen::Index>(scenario.slas.size()), kSlaFeatures);
    for (const Sla& sla : scenario.slas) f.sla_features(sla.id, 0) = sla.demand;
    return f;
}

namespace {

void column_stats(std::span<const FeatureSet> features, bool components, int width,
                  std::vector<double>& mean, std::vector<double>& stdev) {
    mean.assign(static_cast<std::size_t>(width), 0.0);
    stdev.assign(static_cast<std::size_t>(width), kStdFloor);
    double count = 0.0;
    for (const FeatureSet& f : features) {
        const Matrix& m = components ? f.component_features : f.sla_features;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (int c = 0; c < width; ++c) mean[static_cast<std::size_t>(c)] += m(r, c);
        count += static_cast<double>(m.rows());
    }
    if (count == 0.0) return;
    for (double& v : mean) v /= count;
    std::vector<double> var(static_cast<std::size_t>(width), 0.0);
    for (const FeatureSet& f : features) {
        const Matrix& m = components ? f.component_features : f.sla_features;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (int c = 0; c < width; ++c) {
                const double d = m(r, c) - mean[static_cast<std::size_t>(c)];
                var[static_cast<std::size_t>(c)] += d * d;
            }
    }
    for (std::size_t c = 0; c < var.size(); ++c) stdev[c] = std::max(kStdFloor, std::sqrt(var[c] / count));
}

}  // namespace

NormStats fit_normalizer(std::span<const FeatureSet> features, std::span<const double> labels) {
    NormStats s;
    column_stats(features, true, kComponentFeatures, s.component_mean, s.component_std);
    column_stats(features, false, kSlaFeatures, s.sla_mean, s.sla_std);
    if (!labels.empty()) {
        double sum = 0.0;
        for (double y : labels) sum += y;
        s.label_mean = sum / static_cast<double>(labels.size());
        double var = 0.0;
        for (double y : labels) var += (y - s.label_mean) * (y - s.label_mean);
        s.label_std = std::max(kStdFloor, std::sqrt(var / static_cast<double>(labels.size())));
    }
    return s;
}

namespace {

Matrix transform(const Matrix& m, const std::vector<double>& mean, const std::vector<double>& sd, bool forward) {
    if (m.cols() != static_cast<Eigen::Index>(mean.size()))
        throw ParameterError("feature width does not match normalizer");
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const auto i = static_cast<std::size_t>(c);
            out(r, c) = forward ? (m(r, c) - mean[i]) / sd[i] : m(r, c) * sd[i] + mean[i];
        }
    return out;
}

}  // namespace

FeatureSet normalize_features(const NormStats& stats, const FeatureSet& raw) {
    return {transform(raw.component_features, stats.component_mean, stats.component_std, true),
            transform(raw.sla_features, stats.sla_mean, stats.sla_std, true)};
}

FeatureSet denormalize_features(const NormStats& stats, const FeatureSet& normalized) {
    return {transform(normalized.component_features, stats.component_mean, stats.component_std, false),
            transform(normalized.sla_features, stats.sla_mean, stats.sla_std, false)};
}

double normalize_label(const NormStats& stats, double y) { return (y - stats.label_mean) / stats.label_std; }

double denormalize_label(const NormStats& stats, double z) { return z * stats.label_std + stats.label_mean; }

}  // namespace risknet
