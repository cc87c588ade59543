#include "risknet/reliability.hpp"

#include <cmath>

#include "risknet/error.hpp"

namespace risknet {

void validate(const ComponentReliability& rel) {
    if (!(rel.lambda_per_year > 0.0) || !std::isfinite(rel.lambda_per_year))
        throw ParameterError("failure intensity must be positive");
    if (!(rel.pareto_alpha > 1.0) || !std::isfinite(rel.pareto_alpha))
        throw ParameterError("Pareto shape must exceed 1");
    if (!(rel.pareto_beta_h > 0.0) || !std::isfinite(rel.pareto_beta_h))
        throw ParameterError("Pareto scale must be positive");
}

ComponentReliability default_reliability(const Link& link, Rng& rng,
                                         const ReliabilityDefaults& defaults) {
    if (!(link.length_km > 0.0)) throw ParameterError("link length must be positive");
    ComponentReliability rel;
    rel.lambda_per_year = defaults.lambda_per_km_year * link.length_km;
    rel.pareto_alpha = rng.uniform(defaults.alpha_min, defaults.alpha_max);
    rel.pareto_beta_h = rng.uniform(defaults.beta_min_h, defaults.beta_max_h);
    return rel;
}

double uptime_from_uniform(const ComponentReliability& rel, double u) {
    const double rate_per_hour = rel.lambda_per_year / kHoursPerYear;
    return -std::log(u) / rate_per_hour;
}

double downtime_from_uniform(const ComponentReliability& rel, double u) {
    return rel.pareto_beta_h * std::pow(u, -1.0 / rel.pareto_alpha);
}

double sample_uptime(const ComponentReliability& rel, Rng& rng) {
    return uptime_from_uniform(rel, rng.uniform_open_closed());
}

double sample_downtime(const ComponentReliability& rel, Rng& rng) {
    return downtime_from_uniform(rel, rng.uniform_open_closed());
}

double mean_uptime_hours(const ComponentReliability& rel) {
    return kHoursPerYear / rel.lambda_per_year;
}

double mean_downtime_hours(const ComponentReliability& rel) {
    return rel.pareto_alpha * rel.pareto_beta_h / (rel.pareto_alpha - 1.0);
}

double analytic_unavailability(const ComponentReliability& rel) {
    const double down = mean_downtime_hours(rel);
    return down / (mean_uptime_hours(rel) + down);
}

}  // namespace risknet
