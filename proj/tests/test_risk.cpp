#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <json.hpp>
#include <random>

#include "risknet/error.hpp"
#include "risknet/risk.hpp"
#include "risknet/student_t.hpp"

using namespace risknet;

namespace {

PredictedDistribution dist(std::vector<double> mu, std::vector<double> sigma) {
    PredictedDistribution d;
    d.location = std::move(mu);
    d.scale = std::move(sigma);
    return d;
}

/// Standard t draws as Z / sqrt(chi2 / nu), independent of the library's quantile code.
struct TSampler {
    std::mt19937_64 engine;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::chi_squared_distribution<double> chi2;
    double nu;
    TSampler(std::uint64_t seed, double nu_) : engine(seed), chi2(nu_), nu(nu_) {}
    double operator()() { return normal(engine) / std::sqrt(chi2(engine) / nu); }
};

/// Tail mean of an empirical sample at mass p with fractional weight on the boundary atom.
double empirical_cvar(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end(), std::greater<>());
    const double k = p * static_cast<double>(x.size());
    const auto whole = static_cast<std::size_t>(std::floor(k));
    double s = 0.0;
    for (std::size_t i = 0; i < whole; ++i) s += x[i];
    if (whole < x.size()) s += (k - static_cast<double>(whole)) * x[whole];
    return s / k;
}

}  // namespace

TEST_CASE("t quantile") {
    CHECK(t_quantile(0.5) == 0.0);
    CHECK(std::abs(t_quantile(0.95) - 2.0150) <= 1e-4);
    CHECK(t_quantile(0.95) == doctest::Approx(2.0150483733330).epsilon(1e-10));
    CHECK(t_quantile(0.975) == doctest::Approx(2.570581835636314).epsilon(1e-10));
    CHECK(t_quantile(0.975, 1.0) == doctest::Approx(std::tan(std::numbers::pi * 0.475)).epsilon(1e-9));
    for (double q = 0.001; q <= 0.999; q += 0.0037) {
        CHECK(t_quantile(q) == doctest::Approx(-t_quantile(1 - q)).epsilon(1e-9));
        CHECK(std::abs(t_cdf(t_quantile(q)) - q) <= 1e-9);
    }
    CHECK_THROWS_AS(t_quantile(0.0), ParameterError);
    CHECK_THROWS_AS(t_quantile(1.0), ParameterError);
}

TEST_CASE("value at risk") {
    const auto v = value_at_risk(dist({0.0, 1.0, -2.0}, {1.0, 3.0, 1e-300}), 0.05);
    CHECK(std::abs(v[0] - 2.0150) <= 1e-4);
    CHECK(v[1] == doctest::Approx(1.0 + 3.0 * t_quantile(0.95)).epsilon(1e-14));
    CHECK(v[2] == -2.0);

    NormStats s;
    s.label_mean = 10.0;
    s.label_std = 4.0;
    const auto raw = value_at_risk(dist({0.5}, {2.0}), 0.1, s);
    CHECK(raw[0] == doctest::Approx(10.0 + 4.0 * (0.5 + 2.0 * t_quantile(0.9))).epsilon(1e-14));
    CHECK_THROWS_AS(value_at_risk(dist({0.0}, {1.0}), 1.0), ParameterError);
}

TEST_CASE("conditional value at risk closed form") {
    const double tq = t_quantile(0.95);
    const double oracle = t_pdf(tq) * (5.0 + tq * tq) / (0.05 * 4.0);
    const auto c = conditional_value_at_risk(dist({0.0}, {1.0}), 0.05);
    CHECK(c[0] == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(c[0] == doctest::Approx(2.8901289).epsilon(1e-7));
    CHECK(t_tail_mean(0.05) == doctest::Approx(oracle).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double mu = 10 * u(rng) - 5, sigma = 0.01 + 4 * u(rng), p = 0.001 + 0.5 * u(rng), a = 6 * u(rng) - 3;
        const double var = value_at_risk(dist({mu}, {sigma}), p)[0];
        const double cvar = conditional_value_at_risk(dist({mu}, {sigma}), p)[0];
        CHECK(cvar >= var);
        CHECK(conditional_value_at_risk(dist({mu + a}, {sigma}), p)[0] == doctest::Approx(a + cvar).epsilon(1e-12));
    }

    NormStats s;
    s.label_mean = -1.0;
    s.label_std = 0.5;
    CHECK(conditional_value_at_risk(dist({0.0}, {1.0}), 0.05, s)[0] == doctest::Approx(-1.0 + 0.5 * oracle).epsilon(1e-14));
}

TEST_CASE("closed-form tail means agree with Monte Carlo") {
    std::mt19937_64 pick(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double mu = 4 * u(pick) - 2, sigma = 0.2 + 2 * u(pick), p = 0.01 + 0.2 * u(pick);
        const double var = value_at_risk(dist({mu}, {sigma}), p)[0];
        const double cvar = conditional_value_at_risk(dist({mu}, {sigma}), p)[0];
        TSampler t(100 + static_cast<std::uint64_t>(trial), 5.0);
        double s = 0.0, s2 = 0.0;
        long n = 0;
        for (int i = 0; i < 1000000; ++i) {
            const double x = mu + sigma * t();
            if (x > var) {
                s += x;
                s2 += x * x;
                ++n;
            }
        }
        const double mean = s / static_cast<double>(n);
        const double se = std::sqrt((s2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
        INFO("mu " << mu << " sigma " << sigma << " p " << p << " mc " << mean << " closed " << cvar);
        CHECK(std::abs(mean - cvar) <= 3 * se);
    }
}

TEST_CASE("network bound and risk report") {
    CHECK(network_cvar_bound(std::vector<double>{}) == 0.0);
    CHECK(network_cvar_bound(std::vector<double>{2.5}) == 2.5);
    CHECK(network_cvar_bound(std::vector<double>{1.0, 2.0, -0.5}) == 2.5);

    NormStats s;
    s.label_mean = 3.0;
    s.label_std = 2.0;
    const auto d = dist({0.0, 1.0}, {1.0, 0.5});
    const RiskReport r = risk_report(d, 0.05, &s);
    CHECK_FALSE(r.normalized);
    CHECK(r.sla_ids == std::vector<int>{0, 1});
    CHECK(r.cvar == conditional_value_at_risk(d, 0.05, s));
    CHECK(r.network_bound == doctest::Approx(r.cvar[0] + r.cvar[1]).epsilon(1e-15));
    const RiskReport n = risk_report(d, 0.05, nullptr);
    CHECK(n.normalized);
    CHECK(n.var == value_at_risk(d, 0.05));

    const auto j = nlohmann::json::parse(risk_report_to_json(r));
    CHECK(j.at("p").get<double>() == 0.05);
    CHECK(j.at("slas").size() == 2);
    CHECK(j.at("slas").at(1).at("cvar").get<double>() == r.cvar[1]);
    CHECK(j.at("network_cvar_bound").get<double>() == r.network_bound);
}

TEST_CASE("simulated total penalty respects the summed per-SLA tail means") {
    ScenarioRecipe recipe;
    recipe.n_routers = 10;
    for (int trial = 0; trial < 20; ++trial) {
        recipe.rho = 0.5 + 0.025 * trial;
        const Scenario sc = generate_scenario(recipe, 500 + static_cast<std::uint64_t>(trial));
        SimulationOptions o;
        o.years = 400;
        o.seed = 900 + static_cast<std::uint64_t>(trial);
        const PenaltyTable t = simulate(sc, o).penalties;
        std::vector<double> total(static_cast<std::size_t>(t.years()), 0.0), cvars;
        for (int k = 0; k < t.n_slas(); ++k) {
            std::vector<double> col;
            for (int y = 0; y < t.years(); ++y) {
                col.push_back(t.at(y, k));
                total[static_cast<std::size_t>(y)] += t.at(y, k);
            }
            cvars.push_back(empirical_cvar(col, 0.05));
        }
        const double bound = network_cvar_bound(cvars);
        CHECK(empirical_cvar(total, 0.05) <= bound * (1 + 1e-12) + 1e-9);
    }
}

TEST_CASE("baseline and pooled likelihoods") {
    const std::vector<double> zeros(17, 0.0);
    CHECK(baseline_nll(zeros) == doctest::Approx(0.9686195890547242).epsilon(1e-13));
    std::vector<double> y{0.3, -1.2, 2.0, 0.0};
    const double b = baseline_nll(y);
    std::vector<double> shuffled{2.0, 0.0, 0.3, -1.2};
    CHECK(baseline_nll(shuffled) == doctest::Approx(b).epsilon(1e-15));
    y.push_back(40.0);
    CHECK(baseline_nll(y) > b);

    const std::vector<double> mu{0.1, 0.2}, sigma{1.0, 2.0}, obs{0.5, -1.0};
    const double expect = -(student_t_logpdf(0.5, 0.1, 1.0) + student_t_logpdf(-1.0, 0.2, 2.0)) / 2;
    CHECK(pooled_nll(obs, mu, sigma) == doctest::Approx(expect).epsilon(1e-15));
    CHECK_THROWS_AS(baseline_nll(std::vector<double>{}), ParameterError);
    CHECK_THROWS_AS(pooled_nll(obs, mu, std::vector<double>{1.0}), ParameterError);
}

TEST_CASE("information gain in bits") {
    CHECK(information_gain_bits(0.7, 0.7) == 0.0);
    CHECK(information_gain_bits(-1.42, 1.10) == doctest::Approx(3.6356).epsilon(1e-4));
    CHECK(information_gain_bits(-1.42, 1.10) == doctest::Approx(2.52 / std::log(2.0)).epsilon(1e-14));
    CHECK(information_gain_bits(0.0, 2.0) == doctest::Approx(2 * information_gain_bits(0.0, 1.0)).epsilon(1e-15));
    CHECK(information_gain_bits(1.0, 0.5) < 0.0);
}

TEST_CASE("pp-plot") {
    const auto grid = default_pp_grid();
    REQUIRE(grid.size() == 99);
    CHECK(grid.front() == doctest::Approx(0.01));
    CHECK(grid.back() == doctest::Approx(0.99));

    SUBCASE("calibrated labels track the diagonal") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        TSampler t(22, 5.0);
        std::vector<double> y, mu, sigma;
        const int n = 40000;
        for (int i = 0; i < n; ++i) {
            mu.push_back(6 * u(rng) - 3);
            sigma.push_back(0.1 + 3 * u(rng));
            y.push_back(mu.back() + sigma.back() * t());
        }
        const PPPlotData pp = ppplot(y, mu, sigma, grid);
        CHECK(pp.n == static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            INFO("q " << grid[i]);
            CHECK(std::abs(pp.q_hat[i] - grid[i]) <= 3 * std::sqrt(grid[i] * (1 - grid[i]) / n));
            if (i) CHECK(pp.q_hat[i] >= pp.q_hat[i - 1]);
        }
        CHECK(pp.max_deviation() < 0.02);
    }
    SUBCASE("shifted labels deviate systematically") {
        TSampler t(23, 5.0);
        std::vector<double> y, mu(5000, 0.0), sigma(5000, 1.0);
        for (int i = 0; i < 5000; ++i) y.push_back(1.0 + t());
        const PPPlotData pp = ppplot(y, mu, sigma, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(pp.q_hat[i] <= grid[i]);
        CHECK(pp.max_deviation() > 0.3);
    }
    SUBCASE("strict inequality and csv") {
        const std::vector<double> y{0.0, 1.0}, mu{0.0, 0.0}, sigma{1.0, 1.0}, g{0.5};
        const PPPlotData pp = ppplot(y, mu, sigma, g);
        CHECK(pp.q_hat[0] == 0.0);
        CHECK(ppplot_to_csv(pp) == "q,q_hat,n\n0.5,0,2\n");
        CHECK(pp.max_deviation() == 0.5);
    }
    const std::vector<double> one{0.0};
    CHECK_THROWS_AS(ppplot(one, one, one, std::vector<double>{0.5, 0.4}), ParameterError);
    CHECK_THROWS_AS(ppplot(one, one, one, std::vector<double>{1.0}), ParameterError);
}

TEST_CASE("evaluation report on a prepared split") {
    PreparedSplit split;
    MetaGraph g;
    g.n_components = 1;
    g.n_slas = 2;
    g.edges_working = {{0, 0}, {1, 0}};
    FeatureSet f{Matrix::Constant(1, kComponentFeatures, 0.2), Matrix::Constant(2, kSlaFeatures, -0.3)};
    split.inputs.push_back(ModelInput::build(g, f));
    split.record_ids = {0};
    split.labels = {{0.1, -0.2}, {1.5, 0.0}, {-0.4, 0.3}};
    split.owner = {0, 0, 0};
    split.years = {0, 1, 2};

    Hyper h;
    h.hidden_dim = 6;
    h.msg_dim = 4;
    h.iterations = 2;
    h.readout_sizes = {5};
    h.dropout_rates = {};
    const ModelParams p = init_params(h, 4);
    const auto preds = predict_split(p, h, split);
    REQUIRE(preds.size() == 1);
    const FlatPredictions flat = flatten(split, preds);
    CHECK(flat.y.size() == 6);
    CHECK(flat.mu[2] == preds[0].location[0]);
    CHECK(flat.sigma[5] == preds[0].scale[1]);
    const FlatPredictions base = flatten_baseline(split);
    CHECK(base.mu == std::vector<double>(6, 0.0));

    const EvaluationReport r = evaluate(p, h, split);
    CHECK(r.examples == 3);
    CHECK(r.entries == 6);
    CHECK(r.model_nll == doctest::Approx(pooled_nll(flat.y, flat.mu, flat.sigma)).epsilon(1e-15));
    CHECK(r.baseline_nll == doctest::Approx(baseline_nll(flat.y)).epsilon(1e-15));
    CHECK(r.bits_gained == doctest::Approx(information_gain_bits(r.model_nll, r.baseline_nll)).epsilon(1e-15));
    const auto j = nlohmann::json::parse(evaluation_to_json(r));
    CHECK(j.at("bits_gained").get<double>() == r.bits_gained);
    CHECK(evaluation_to_json(r).find('\n') == std::string::npos);
    CHECK_THROWS_AS(evaluate(p, h, PreparedSplit{}), ParameterError);
}
