#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "risknet/linalg.hpp"
#include "risknet/metagraph.hpp"

namespace risknet {

struct Hyper {
    int hidden_dim = 32;
    int msg_dim = 64;
    int iterations = 6;  // message-passing rounds T
    std::vector<double> dropout_rates{0.2, 0.1};  // applied after readout hidden layers 1, 2, ...
    double l2_coeff = 0.01;
    double nu = 5.0;
    std::vector<int> readout_sizes{64, 64, 32};
    bool operator==(const Hyper&) const = default;
};

/// Throws ParameterError on non-positive sizes, T < 1, or bad dropout rates.
void validate(const Hyper& hyper);

/// Affine map y = x * weight + bias with row-vector inputs.
struct Affine {
    Matrix weight;  // in x out
    Matrix bias;    // 1 x out
};

/// Gate layout along the 3H axis: [update | reset | candidate].
struct GruCell {
    Matrix kernel;     // input x 3H
    Matrix recurrent;  // H x 3H
    Matrix bias;       // 1 x 3H
};

enum MessageMap : int { kWorkingToComponent = 0, kBackupToComponent = 1, kWorkingToSla = 2, kBackupToSla = 3 };

/// Every learnable weight. The same type holds gradients.
struct ModelParams {
    // Input layout [h_sender, h_receiver] (2H x msg_dim), shared across rounds.
    std::array<Affine, 4> messages;
    GruCell component_update;
    GruCell sla_update;
    std::vector<Affine> readout;  // hidden layers, then the 2-wide output layer

    ModelParams zeros_like() const;
    /// Named views of every tensor, in a fixed order.
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;
};

/// Glorot-uniform kernels and weights, zero biases.
ModelParams init_params(const Hyper& hyper, std::uint64_t seed);

/// Metagraph plus normalized features with incidence lists, built once per
/// scenario and reused across forward passes.
struct ModelInput {
    int n_components = 0;
    int n_slas = 0;
    Matrix component_features;  // normalized, n_components x 4
    Matrix sla_features;        // normalized, n_slas x 1
    std::vector<std::vector<int>> sla_working, sla_backup;    // components per SLA
    std::vector<std::vector<int>> comp_working, comp_backup;  // SLAs per component

    static ModelInput build(const MetaGraph& graph, const FeatureSet& normalized);
};

/// Disjoint union of several inputs (block-diagonal merge with index offsets).
ModelInput merge_inputs(std::span<const ModelInput* const> parts);

struct PredictedDistribution {
    std::vector<double> location;  // normalized penalty units
    std::vector<double> scale;     // > 0
    double nu = 5.0;
};

inline constexpr double kScaleFloor = 1e-6;

double softplus(double x);

/// Eval mode has no dropout; Train mode draws inverted-dropout masks from the seed.
struct ForwardMode {
    bool train = false;
    std::uint64_t dropout_seed = 0;

    static ForwardMode eval() { return {}; }
    static ForwardMode training(std::uint64_t seed) { return {true, seed}; }
};

PredictedDistribution forward(const ModelParams& params, const Hyper& hyper, const ModelInput& input,
                              ForwardMode mode = ForwardMode::eval());

/// Final SLA hidden states after T rounds; exposed for tests.
Matrix sla_states(const ModelParams& params, const Hyper& hyper, const ModelInput& input);

/// One training/evaluation sample: an input and its normalized labels.
struct Example {
    const ModelInput* input = nullptr;
    std::span<const double> labels;
};

struct LossParts {
    double nll = 0.0;             // mean over examples of the per-example mean NLL
    double regularization = 0.0;  // l2 * sum of squared message weights
    double total() const { return nll + regularization; }
};

/// In Train mode example i of the batch uses dropout stream (seed, i).
LossParts loss(const ModelParams& params, const Hyper& hyper, std::span<const Example> batch,
               ForwardMode mode = ForwardMode::eval(), int threads = 1);

/// Exact reverse-mode gradient of `loss` with the same mode semantics. Examples
/// sharing an input run message passing once. Throws NumericalError naming the
/// block if any gradient entry is non-finite.
LossParts value_and_gradients(const ModelParams& params, const Hyper& hyper,
                              std::span<const Example> batch, ModelParams& grads,
                              ForwardMode mode = ForwardMode::eval(), int threads = 1);

/// Average of n_passes Train-mode forwards (mean location, mean scale).
PredictedDistribution predict_mc_dropout(const ModelParams& params, const Hyper& hyper,
                                         const ModelInput& input, int n_passes, std::uint64_t seed);

}  // namespace risknet
