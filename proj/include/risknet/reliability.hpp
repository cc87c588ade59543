#pragma once

#include "risknet/rng.hpp"
#include "risknet/topology.hpp"

namespace risknet {

inline constexpr double kHoursPerYear = 8760.0;

/// Alternating renewal model of one link: exponential up-times and
/// Pareto (type I) down-times.
struct ComponentReliability {
    double lambda_per_year = 1.0;  // failure intensity
    double pareto_alpha = 2.0;     // shape, > 1
    double pareto_beta_h = 1.0;    // scale = minimum downtime in hours
    bool operator==(const ComponentReliability&) const = default;
};

/// Throws ParameterError unless lambda > 0, alpha > 1 and beta > 0.
void validate(const ComponentReliability& rel);

/// Synthetic default parameter ranges. The failure intensity scales with
/// link length; shape and scale of the downtime are drawn uniformly.
struct ReliabilityDefaults {
    double lambda_per_km_year = 0.002;
    double alpha_min = 1.5;
    double alpha_max = 2.5;
    double beta_min_h = 0.5;
    double beta_max_h = 4.0;
};

ComponentReliability default_reliability(const Link& link, Rng& rng,
                                         const ReliabilityDefaults& defaults = {});

/// Inverse-transform samples. The *_from_uniform forms take U in (0, 1].
double uptime_from_uniform(const ComponentReliability& rel, double u);
double downtime_from_uniform(const ComponentReliability& rel, double u);
double sample_uptime(const ComponentReliability& rel, Rng& rng);
double sample_downtime(const ComponentReliability& rel, Rng& rng);

double mean_uptime_hours(const ComponentReliability& rel);
double mean_downtime_hours(const ComponentReliability& rel);

/// Long-run fraction of time an isolated component spends down.
double analytic_unavailability(const ComponentReliability& rel);

}  // namespace risknet
