#include "risknet/student_t.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "risknet/error.hpp"

namespace risknet {

namespace {

double log_norm_const(double nu) {
    return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
}

}  // namespace

double student_t_logpdf(double y, double mu, double sigma, double nu) {
    const double z = (y - mu) / sigma;
    return log_norm_const(nu) - std::log(sigma) - (nu + 1.0) / 2.0 * std::log1p(z * z / nu);
}

double t_pdf(double x, double nu) { return std::exp(student_t_logpdf(x, 0.0, 1.0, nu)); }

double t_cdf(double x, double nu) {
    if (x == 0.0) return 0.5;
    const double tail = 0.5 * boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + x * x));
    return x < 0.0 ? tail : 1.0 - tail;
}

double t_quantile(double q, double nu) {
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("quantile level must lie in (0, 1)");
    if (q == 0.5) return 0.0;
    if (q < 0.5) return -t_quantile(1.0 - q, nu);

    double lo = 0.0, hi = 1.0;
    while (t_cdf(hi, nu) < q) {
        lo = hi;
        hi *= 2.0;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = t_cdf(x, nu) - q;
        if (f == 0.0) return x;
        if (f < 0.0)
            lo = x;
        else
            hi = x;
        double next = x - f / t_pdf(x, nu);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step < 1e-13 || hi - lo < 1e-13) break;
    }
    return x;
}

double t_tail_mean(double tail, double nu) {
    if (!(tail > 0.0 && tail < 1.0)) throw ParameterError("tail mass must lie in (0, 1)");
    if (!(nu > 1.0)) throw ParameterError("tail mean needs nu > 1");
    const double tq = t_quantile(1.0 - tail, nu);
    return t_pdf(tq, nu) * (nu + tq * tq) / (tail * (nu - 1.0));
}

}  // namespace risknet
