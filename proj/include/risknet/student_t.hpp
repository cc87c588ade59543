#pragma once

namespace risknet {

inline constexpr double kDefaultNu = 5.0;

/// Log-density of the location-scale Student t.
double student_t_logpdf(double y, double mu, double sigma, double nu = kDefaultNu);

/// Standard Student t density and distribution function.
double t_pdf(double x, double nu = kDefaultNu);
double t_cdf(double x, double nu = kDefaultNu);

/// Inverse CDF of the standard t by safeguarded Newton iteration on t_cdf.
/// Requires 0 < q < 1; absolute tolerance 1e-10.
double t_quantile(double q, double nu = kDefaultNu);

/// Mean of the standard t beyond its (1 - tail) quantile.
double t_tail_mean(double tail, double nu = kDefaultNu);

}  // namespace risknet
