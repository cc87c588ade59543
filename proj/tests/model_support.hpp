#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "risknet/dataset.hpp"
#include "risknet/model.hpp"

namespace testing {

using namespace risknet;

/// Random normalized features on a fixed small metagraph.
struct Toy {
    ModelInput input;
    std::vector<double> labels;
};

inline Toy toy_problem(std::uint64_t seed, int n_components = 5) {
    MetaGraph g;
    g.n_components = n_components;
    g.n_slas = 3;
    g.edges_working = {{0, 0}, {0, 1}, {1, 2}, {2, 0}, {2, 3}};
    g.edges_backup = {{0, 2}, {0, 3}, {1, 0}, {1, 4 % n_components}, {2, 1}};
    Rng rng(seed);
    FeatureSet f;
    f.component_features.resize(n_components, kComponentFeatures);
    f.sla_features.resize(3, kSlaFeatures);
    for (Eigen::Index i = 0; i < f.component_features.size(); ++i) f.component_features.data()[i] = rng.uniform(-1.5, 1.5);
    for (Eigen::Index i = 0; i < f.sla_features.size(); ++i) f.sla_features.data()[i] = rng.uniform(-1.5, 1.5);
    Toy t{ModelInput::build(g, f), {}};
    for (int k = 0; k < 3; ++k) t.labels.push_back(rng.uniform(-2.0, 2.0));
    return t;
}

/// Nudges every parameter by a small random amount so biases are non-zero
/// and no gradient block vanishes by symmetry.
inline void jitter(ModelParams& p, std::uint64_t seed, double scale = 0.05) {
    Rng rng(seed);
    for (auto& [name, t] : p.tensors())
        for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += rng.uniform(-scale, scale);
}

struct BlockError {
    std::string name;
    double rel_error = 0.0;
};

/// Central finite differences of the loss for every tensor entry, compared
/// blockwise as ||g - g_fd|| / max(||g||, ||g_fd||, 1e-12).
inline std::vector<BlockError> gradient_check(const ModelParams& params, const Hyper& hyper,
                                              std::span<const Example> batch, ForwardMode mode, double step = 1e-4) {
    ModelParams grads;
    value_and_gradients(params, hyper, batch, grads, mode);
    ModelParams probe = params;
    std::vector<BlockError> out;
    auto pt = probe.tensors();
    const auto gt = grads.tensors();
    for (std::size_t t = 0; t < pt.size(); ++t) {
        Matrix& w = *pt[t].second;
        Matrix fd(w.rows(), w.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double orig = w.data()[i];
            w.data()[i] = orig + step;
            const double up = loss(probe, hyper, batch, mode).total();
            w.data()[i] = orig - step;
            const double down = loss(probe, hyper, batch, mode).total();
            w.data()[i] = orig;
            fd.data()[i] = (up - down) / (2.0 * step);
        }
        const Matrix& g = *gt[t].second;
        const double denom = std::max({g.norm(), fd.norm(), 1e-12});
        out.push_back({pt[t].first, (g - fd).norm() / denom});
    }
    return out;
}

/// Inputs relabeled by an SLA permutation (new index = perm[old]) and a
/// component permutation, with incidence lists in canonical sorted order.
inline ModelInput permute_input(const ModelInput& in, const std::vector<int>& sla_perm,
                                const std::vector<int>& comp_perm) {
    MetaGraph g;
    g.n_components = in.n_components;
    g.n_slas = in.n_slas;
    for (int s = 0; s < in.n_slas; ++s) {
        for (int c : in.sla_working[static_cast<std::size_t>(s)])
            g.edges_working.push_back({sla_perm[static_cast<std::size_t>(s)], comp_perm[static_cast<std::size_t>(c)]});
        for (int c : in.sla_backup[static_cast<std::size_t>(s)])
            g.edges_backup.push_back({sla_perm[static_cast<std::size_t>(s)], comp_perm[static_cast<std::size_t>(c)]});
    }
    std::sort(g.edges_working.begin(), g.edges_working.end());
    std::sort(g.edges_backup.begin(), g.edges_backup.end());
    FeatureSet f;
    f.component_features.resize(in.component_features.rows(), in.component_features.cols());
    f.sla_features.resize(in.sla_features.rows(), in.sla_features.cols());
    for (int c = 0; c < in.n_components; ++c)
        f.component_features.row(comp_perm[static_cast<std::size_t>(c)]) = in.component_features.row(c);
    for (int s = 0; s < in.n_slas; ++s) f.sla_features.row(sla_perm[static_cast<std::size_t>(s)]) = in.sla_features.row(s);
    return ModelInput::build(g, f);
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
    return p;
}

/// Normalized model input for a generated scenario, with statistics fit on
/// that scenario alone.
inline ModelInput scenario_input(const Scenario& s) {
    const std::vector<FeatureSet> fs{extract_features(s)};
    const std::vector<double> labels{0.0, 1.0};
    return prepare_input(s, fit_normalizer(fs, labels));
}

}  // namespace testing
