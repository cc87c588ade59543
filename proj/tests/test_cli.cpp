#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "risknet/cli.hpp"
#include "risknet/provisioning.hpp"
#include "risknet/scenario_io.hpp"
#include "risknet/simulator.hpp"
#include "support.hpp"

using namespace risknet;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("usage and exit codes") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--help"}).out.find("simulate") != std::string::npos);
    CHECK(run({}).code == 1);
    const Run unknown = run({"generate", "--bogus", "3"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("generate") != std::string::npos);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"simulate"}).code == 1);
    CHECK(run({"generate", "--routers", "2"}).code == 1);
    CHECK(run({"build-dataset", "--topologies", "2"}).code == 1);
    CHECK(run({"simulate", "--scenario", "/nonexistent/s.json"}).code == 2);
    CHECK(run({"generate", "--routers", "4", "--ba-m", "9"}).code == 2);
}

TEST_CASE("generate and simulate") {
    testing::TempDir dir("cli_sim");
    const std::string scen = dir.file("s.json");
    Run g = run({"generate", "--routers", "8", "--seed", "7", "--rho", "0.6", "--out", scen});
    REQUIRE(g.code == 0);
    const Scenario sc = deserialize_scenario(slurp(scen));
    CHECK(sc.topology.n_routers() == 8);
    CHECK(run({"generate", "--routers", "8", "--seed", "7", "--rho", "0.6"}).out == slurp(scen));

    const std::string csv = dir.file("p.csv");
    Run s = run({"simulate", "--scenario", scen, "--years", "30", "--seed", "7", "--out", csv});
    REQUIRE(s.code == 0);
    const auto timer = nlohmann::json::parse(lines(s.out).at(0));
    CHECK(timer.at("command") == "simulate");
    CHECK(timer.at("seconds").get<double>() >= 0.0);
    CHECK(timer.at("years") == 30);

    SimulationOptions o;
    o.years = 30;
    o.seed = 7;
    const PenaltyTable direct = simulate(sc, o).penalties;
    CHECK(penalty_table_from_csv(slurp(csv)) == direct);

    Run s3 = run({"simulate", "--scenario", scen, "--years", "30", "--seed", "7", "--threads", "3"});
    REQUIRE(s3.code == 0);
    CHECK(s3.out == slurp(csv));
    CHECK(nlohmann::json::parse(lines(s3.err).at(0)).at("command") == "simulate");

    Run dense = run({"simulate", "--scenario", scen, "--years", "3", "--dense"});
    CHECK(lines(dense.out).size() == 1 + 3 * sc.slas.size() + 1);
}

TEST_CASE("import sndlib") {
    testing::TempDir dir("cli_snd");
    const std::string topo = dir.file("t.json"), scen = dir.file("s.json");
    Run r = run({"import-sndlib", "--in", std::string(RISKNET_TEST_DATA) + "/abilene.txt", "--out", topo,
                 "--scenario", scen, "--rho", "0.8"});
    REQUIRE(r.code == 0);
    CHECK(deserialize_topology(slurp(topo)).n_links() == 15);
    const Scenario sc = deserialize_scenario(slurp(scen));
    CHECK(sc.topology.n_routers() == 12);
    CHECK(!sc.slas.empty());
    CHECK(run({"import-sndlib", "--in", dir.file("missing.txt")}).code == 2);
}

TEST_CASE("dataset, training, evaluation and prediction") {
    testing::TempDir dir("cli_pipeline");
    const std::string data = dir.file("data"), ckpt = dir.file("m.json"), metrics = dir.file("metrics.csv");
    Run b = run({"build-dataset", "--topologies", "5", "--router-min", "6", "--router-max", "8", "--years", "4",
                 "--seed", "3", "--out", data});
    REQUIRE(b.code == 0);
    const auto summary = nlohmann::json::parse(b.out);
    CHECK(summary.at("topologies") == 5);
    CHECK(summary.at("examples") == 20);

    Run t = run({"train", "--data", data, "--epochs", "2", "--batch", "4", "--hidden", "8", "--msg", "8",
                 "--iterations", "2", "--lr", "0.001", "--metrics", metrics, "--out", ckpt});
    REQUIRE(t.code == 0);
    CHECK(nlohmann::json::parse(t.out).at("epochs") == 2);
    CHECK(t.err.find("epoch 1") != std::string::npos);
    CHECK(lines(slurp(metrics)).size() == 3);
    CHECK(run({"train", "--data", data, "--epochs", "1", "--quiet", "--out", dir.file("q.json")}).err.empty());
    CHECK(run({"train", "--data", data}).code == 1);

    Run e = run({"evaluate", "--ckpt", ckpt, "--data", data, "--split", "train"});
    REQUIRE(e.code == 0);
    const auto ev = nlohmann::json::parse(e.out);
    for (const char* key : {"model_nll", "baseline_nll", "bits_gained"}) CHECK(ev.contains(key));
    CHECK(ev.at("examples") == 16);
    CHECK(run({"evaluate", "--ckpt", ckpt, "--data", data, "--split", "nope"}).code == 2);

    Run pp = run({"ppplot", "--ckpt", ckpt, "--data", data, "--split", "train"});
    REQUIRE(pp.code == 0);
    CHECK(lines(pp.out).size() == 100);
    CHECK(lines(pp.out).at(0) == "q,q_hat,n");
    Run ppb = run({"ppplot", "--ckpt", ckpt, "--data", data, "--split", "train", "--baseline"});
    CHECK(ppb.code == 0);
    CHECK(ppb.out != pp.out);

    const std::string scen = dir.file("s.json");
    REQUIRE(run({"generate", "--routers", "7", "--seed", "2", "--out", scen}).code == 0);
    const Scenario sc = deserialize_scenario(slurp(scen));
    Run p = run({"predict", "--ckpt", ckpt, "--scenario", scen});
    REQUIRE(p.code == 0);
    CHECK(lines(p.out).size() == 1 + sc.slas.size());
    CHECK(lines(p.out).at(0) == "sla_id,location,scale,location_raw,scale_raw");
    CHECK(nlohmann::json::parse(lines(p.err).at(0)).at("command") == "predict");
    Run pmc = run({"predict", "--ckpt", ckpt, "--scenario", scen, "--mc-passes", "5", "--seed", "4"});
    CHECK(pmc.code == 0);
    CHECK(pmc.out == run({"predict", "--ckpt", ckpt, "--scenario", scen, "--mc-passes", "5", "--seed", "4"}).out);

    Run rk = run({"risk", "--ckpt", ckpt, "--scenario", scen, "--p", "0.05"});
    REQUIRE(rk.code == 0);
    const auto risk = nlohmann::json::parse(rk.out);
    CHECK(risk.at("slas").size() == sc.slas.size());
    CHECK(risk.at("normalized") == false);
    double sum = 0.0;
    for (const auto& s : risk.at("slas")) {
        CHECK(s.at("cvar").get<double>() >= s.at("var").get<double>());
        sum += s.at("cvar").get<double>();
    }
    CHECK(risk.at("network_cvar_bound").get<double>() == doctest::Approx(sum).epsilon(1e-12));
    CHECK(nlohmann::json::parse(run({"risk", "--ckpt", ckpt, "--scenario", scen, "--normalized"}).out).at("normalized") ==
          true);
    CHECK(run({"risk", "--ckpt", ckpt, "--scenario", scen, "--p", "1.5"}).code == 1);
    CHECK(run({"predict", "--ckpt", scen, "--scenario", scen}).code == 2);
}
