#include "risknet/risk.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "risknet/error.hpp"
#include "risknet/parallel.hpp"
#include "risknet/student_t.hpp"

namespace risknet {

namespace {

void check_level(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("risk level p must lie in (0, 1)");
}

std::vector<double> denormalized(std::vector<double> v, const NormStats& stats) {
    for (double& x : v) x = denormalize_label(stats, x);
    return v;
}

}  // namespace

std::vector<double> value_at_risk(const PredictedDistribution& dist, double p) {
    check_level(p);
    const double tq = t_quantile(1.0 - p, dist.nu);
    std::vector<double> out(dist.location.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = dist.location[k] + dist.scale[k] * tq;
    return out;
}

std::vector<double> value_at_risk(const PredictedDistribution& dist, double p, const NormStats& stats) {
    return denormalized(value_at_risk(dist, p), stats);
}

std::vector<double> conditional_value_at_risk(const PredictedDistribution& dist, double p) {
    check_level(p);
    const double tail = t_tail_mean(p, dist.nu);
    std::vector<double> out(dist.location.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = dist.location[k] + dist.scale[k] * tail;
    return out;
}

std::vector<double> conditional_value_at_risk(const PredictedDistribution& dist, double p, const NormStats& stats) {
    return denormalized(conditional_value_at_risk(dist, p), stats);
}

double network_cvar_bound(std::span<const double> cvars) {
    double s = 0.0;
    for (double c : cvars) s += c;
    return s;
}

RiskReport risk_report(const PredictedDistribution& dist, double p, const NormStats* stats) {
    RiskReport r;
    r.p = p;
    r.normalized = stats == nullptr;
    r.var = stats ? value_at_risk(dist, p, *stats) : value_at_risk(dist, p);
    r.cvar = stats ? conditional_value_at_risk(dist, p, *stats) : conditional_value_at_risk(dist, p);
    for (std::size_t k = 0; k < r.var.size(); ++k) r.sla_ids.push_back(static_cast<int>(k));
    r.network_bound = network_cvar_bound(r.cvar);
    return r;
}

std::string risk_report_to_json(const RiskReport& r) {
    nlohmann::json slas = nlohmann::json::array();
    for (std::size_t k = 0; k < r.var.size(); ++k)
        slas.push_back({{"sla_id", r.sla_ids[k]}, {"var", r.var[k]}, {"cvar", r.cvar[k]}});
    nlohmann::json j = {{"p", r.p}, {"normalized", r.normalized}, {"network_cvar_bound", r.network_bound},
                        {"slas", slas}};
    return j.dump(2);
}

double baseline_nll(std::span<const double> labels, double nu) {
    if (labels.empty()) throw ParameterError("baseline_nll needs at least one label");
    double s = 0.0;
    for (double y : labels) s -= student_t_logpdf(y, 0.0, 1.0, nu);
    return s / static_cast<double>(labels.size());
}

double pooled_nll(std::span<const double> y, std::span<const double> mu, std::span<const double> sigma, double nu) {
    if (y.empty() || mu.size() != y.size() || sigma.size() != y.size())
        throw ParameterError("pooled_nll needs equally sized, non-empty inputs");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s -= student_t_logpdf(y[i], mu[i], sigma[i], nu);
    return s / static_cast<double>(y.size());
}

double information_gain_bits(double model_nll, double baseline) { return (baseline - model_nll) / std::numbers::ln2; }

double PPPlotData::max_deviation() const {
    double m = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) m = std::max(m, std::abs(q_hat[i] - q[i]));
    return m;
}

std::vector<double> default_pp_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
    return g;
}

PPPlotData ppplot(std::span<const double> y, std::span<const double> mu, std::span<const double> sigma,
                  std::span<const double> grid, double nu) {
    if (y.empty() || mu.size() != y.size() || sigma.size() != y.size())
        throw ParameterError("ppplot needs equally sized, non-empty inputs");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw ParameterError("ppplot grid values must lie in (0, 1)");
        if (i && !(grid[i] > grid[i - 1])) throw ParameterError("ppplot grid must be strictly increasing");
    }
    PPPlotData d;
    d.n = y.size();
    for (double q : grid) {
        const double tq = t_quantile(q, nu);
        std::size_t below = 0;
        for (std::size_t i = 0; i < y.size(); ++i) below += y[i] < mu[i] + sigma[i] * tq;
        d.q.push_back(q);
        d.q_hat.push_back(static_cast<double>(below) / static_cast<double>(y.size()));
    }
    return d;
}

std::string ppplot_to_csv(const PPPlotData& d) {
    std::string out = "q,q_hat,n\n";
    char buf[128];
    for (std::size_t i = 0; i < d.q.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", d.q[i], d.q_hat[i], d.n);
        out += buf;
    }
    return out;
}

std::vector<PredictedDistribution> predict_split(const ModelParams& params, const Hyper& hyper,
                                                 const PreparedSplit& split, int threads) {
    std::vector<PredictedDistribution> out(split.inputs.size());
    parallel_for(split.inputs.size(), threads, [&](std::size_t i) { out[i] = forward(params, hyper, split.inputs[i]); });
    return out;
}

FlatPredictions flatten(const PreparedSplit& split, const std::vector<PredictedDistribution>& per_input) {
    if (per_input.size() != split.inputs.size()) throw ParameterError("one prediction per input expected");
    FlatPredictions f;
    for (std::size_t e = 0; e < split.labels.size(); ++e) {
        const PredictedDistribution& d = per_input[split.owner[e]];
        f.y.insert(f.y.end(), split.labels[e].begin(), split.labels[e].end());
        f.mu.insert(f.mu.end(), d.location.begin(), d.location.end());
        f.sigma.insert(f.sigma.end(), d.scale.begin(), d.scale.end());
    }
    return f;
}

FlatPredictions flatten_baseline(const PreparedSplit& split) {
    FlatPredictions f;
    for (const auto& row : split.labels) f.y.insert(f.y.end(), row.begin(), row.end());
    f.mu.assign(f.y.size(), 0.0);
    f.sigma.assign(f.y.size(), 1.0);
    return f;
}

EvaluationReport evaluate(const ModelParams& params, const Hyper& hyper, const PreparedSplit& split, int threads) {
    const FlatPredictions model = flatten(split, predict_split(params, hyper, split, threads));
    if (model.y.empty()) throw ParameterError("cannot evaluate an empty split");
    const FlatPredictions base = flatten_baseline(split);
    const std::vector<double> grid = default_pp_grid();
    EvaluationReport r;
    r.examples = split.labels.size();
    r.entries = model.y.size();
    r.model_nll = pooled_nll(model.y, model.mu, model.sigma, hyper.nu);
    r.baseline_nll = baseline_nll(model.y, hyper.nu);
    r.bits_gained = information_gain_bits(r.model_nll, r.baseline_nll);
    r.model_pp_max_deviation = ppplot(model.y, model.mu, model.sigma, grid, hyper.nu).max_deviation();
    r.baseline_pp_max_deviation = ppplot(base.y, base.mu, base.sigma, grid, hyper.nu).max_deviation();
    return r;
}

std::string evaluation_to_json(const EvaluationReport& r) {
    nlohmann::json j = {{"model_nll", r.model_nll},
                        {"baseline_nll", r.baseline_nll},
                        {"bits_gained", r.bits_gained},
                        {"examples", r.examples},
                        {"entries", r.entries},
                        {"model_pp_max_deviation", r.model_pp_max_deviation},
                        {"baseline_pp_max_deviation", r.baseline_pp_max_deviation}};
    return j.dump();
}

}  // namespace risknet
