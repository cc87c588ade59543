#pragma once

#include <span>
#include <string>
#include <vector>

#include "risknet/dataset.hpp"
#include "risknet/metagraph.hpp"
#include "risknet/model.hpp"

namespace risknet {

/// Value-at-risk with tail mass p: the (1 - p) quantile of each SLA's
/// predicted distribution. With stats, results are denormalized last.
std::vector<double> value_at_risk(const PredictedDistribution& dist, double p);
std::vector<double> value_at_risk(const PredictedDistribution& dist, double p, const NormStats& stats);

/// Expected shortfall beyond the VaR, closed form for the location-scale t.
std::vector<double> conditional_value_at_risk(const PredictedDistribution& dist, double p);
std::vector<double> conditional_value_at_risk(const PredictedDistribution& dist, double p, const NormStats& stats);

/// Sum of per-SLA CVaR values; an upper bound on the CVaR of the total penalty.
double network_cvar_bound(std::span<const double> cvars);

struct RiskReport {
    double p = 0.05;
    bool normalized = false;
    std::vector<int> sla_ids;
    std::vector<double> var, cvar;
    double network_bound = 0.0;
};

RiskReport risk_report(const PredictedDistribution& dist, double p, const NormStats* stats);
std::string risk_report_to_json(const RiskReport& report);

/// Mean of -log f(y; 0, 1, nu) over every label entry.
double baseline_nll(std::span<const double> labels, double nu = 5.0);

/// Mean of -log f(y; mu, sigma, nu) over every entry.
double pooled_nll(std::span<const double> y, std::span<const double> mu, std::span<const double> sigma,
                  double nu = 5.0);

double information_gain_bits(double model_nll, double baseline_nll);

struct PPPlotData {
    std::vector<double> q, q_hat;
    std::size_t n = 0;  // number of (example, SLA) entries

    double max_deviation() const;
};

/// {0.01, 0.02, ..., 0.99}
std::vector<double> default_pp_grid();

/// q_hat(q) = fraction of entries with y < mu + sigma * t_quantile(q).
PPPlotData ppplot(std::span<const double> y, std::span<const double> mu, std::span<const double> sigma,
                  std::span<const double> grid, double nu = 5.0);
std::string ppplot_to_csv(const PPPlotData& data);

/// Every (example, SLA) entry of a split flattened next to its prediction.
/// Eval-mode predictions depend only on the scenario, so one forward per
/// topology serves all of its years.
struct FlatPredictions {
    std::vector<double> y, mu, sigma;
};

std::vector<PredictedDistribution> predict_split(const ModelParams& params, const Hyper& hyper,
                                                 const PreparedSplit& split, int threads = 1);
FlatPredictions flatten(const PreparedSplit& split, const std::vector<PredictedDistribution>& per_input);
/// Standard t baseline (mu = 0, sigma = 1) for every entry.
FlatPredictions flatten_baseline(const PreparedSplit& split);

struct EvaluationReport {
    double model_nll = 0.0;
    double baseline_nll = 0.0;
    double bits_gained = 0.0;
    std::size_t examples = 0;
    std::size_t entries = 0;
    double model_pp_max_deviation = 0.0;
    double baseline_pp_max_deviation = 0.0;
};

EvaluationReport evaluate(const ModelParams& params, const Hyper& hyper, const PreparedSplit& split, int threads = 1);
std::string evaluation_to_json(const EvaluationReport& report);

}  // namespace risknet
