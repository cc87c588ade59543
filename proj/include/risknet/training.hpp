#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "risknet/checkpoint.hpp"
#include "risknet/dataset.hpp"
#include "risknet/model.hpp"

namespace risknet {

struct TrainConfig {
    Hyper hyper;
    int batch_size = 64;
    double lr0 = 1e-4;
    int warm_epochs = 20;
    double decay = 0.99;  // per epoch after the warm period
    int max_epochs = 100;
    int patience = 10;    // epochs without validation improvement; 0 disables early stopping
    long max_steps = 0;   // 0 = unlimited
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Throws ParameterError on a non-positive batch, learning rate or epoch count.
void validate(const TrainConfig& config);

double lr_schedule(int epoch, const TrainConfig& config);

/// Bias-corrected Adam state with moments shaped like the parameters.
struct OptimizerState {
    ModelParams m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState for_params(const ModelParams& params);
};

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr);

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;  // mean Train-mode batch loss over the epoch
    double test_loss = 0.0;   // Eval-mode NLL, NaN if the split is empty
    double val_loss = 0.0;
    double seconds = 0.0;     // wall time of the epoch
};

/// CSV with header epoch,lr,train_loss,test_loss,val_loss,seconds. The seconds
/// column is omitted when `with_time` is false so logs can be compared bitwise.
std::string metrics_to_csv(const std::vector<EpochMetrics>& rows, bool with_time = true);

struct TrainResult {
    Checkpoint best;  // lowest validation loss seen (train loss if no validation split)
    std::vector<EpochMetrics> metrics;
    long steps = 0;
    int best_epoch = -1;
};

/// Called after every epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochMetrics&)>;

TrainResult train(const TrainConfig& config, const PreparedSplit& train_split, const PreparedSplit& test_split,
                  const PreparedSplit& val_split, const NormStats& stats, const EpochCallback& on_epoch = {});

/// Convenience wrapper preparing the three splits with the dataset's statistics.
TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch = {});

/// Eval-mode mean NLL over the split (per-example mean, then mean over examples).
double split_loss(const ModelParams& params, const Hyper& hyper, const PreparedSplit& split, int threads = 1);

}  // namespace risknet
