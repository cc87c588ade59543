#include "risknet/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "risknet/checkpoint.hpp"
#include "risknet/dataset.hpp"
#include "risknet/error.hpp"
#include "risknet/risk.hpp"
#include "risknet/scenario_io.hpp"
#include "risknet/simulator.hpp"
#include "risknet/sndlib.hpp"
#include "risknet/training.hpp"

namespace risknet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Writes to --out when given, otherwise to stdout.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        write_text_file(path, text);
}

std::string predictions_csv(const PredictedDistribution& d, const NormStats& stats) {
    std::string s = "sla_id,location,scale,location_raw,scale_raw\n";
    char buf[256];
    for (std::size_t k = 0; k < d.location.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", k, d.location[k], d.scale[k],
                      denormalize_label(stats, d.location[k]), d.scale[k] * stats.label_std);
        s += buf;
    }
    return s;
}

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"risknet: SBPP penalty simulation and graph neural surrogate", "risknet"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output path (stdout when omitted)");

    std::function<void()> action;
    auto sub = [&](const char* name, const char* help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };

    // generate
    ScenarioRecipe recipe;
    {
        CLI::App* s = sub("generate", "Generate a provisioned BA scenario");
        s->add_option("--routers", recipe.n_routers, "Number of routers")->check(CLI::Range(3, 1000));
        s->add_option("--ba-m", recipe.ba_m, "BA attachment count");
        s->add_option("--scale-km", recipe.layout_scale_km, "Layout bounding-box diagonal in km");
        s->add_option("--xi", recipe.xi, "Path-pair randomization");
        s->add_option("--rho", recipe.rho, "Backup reservation factor");
        s->add_option("--pair-fraction", recipe.pair_fraction, "Fraction of router pairs with an SLA");
        s->callback([&] {
            action = [&] { emit(g.out, serialize_scenario(generate_scenario(recipe, g.seed)), out); };
        });
    }

    // simulate
    std::string scenario_path;
    int years = 100;
    int block_years = 10;
    bool dense = false;
    double timeout = 0.0;
    {
        CLI::App* s = sub("simulate", "Simulate yearly SLA penalties");
        s->add_option("--scenario", scenario_path, "Scenario JSON")->required();
        s->add_option("--years", years, "Simulated years")->check(CLI::PositiveNumber);
        s->add_option("--block-years", block_years, "Years per parallel block")->check(CLI::PositiveNumber);
        s->add_flag("--dense", dense, "Write every (year, SLA) entry");
        s->add_option("--timeout", timeout, "Wall-clock limit in seconds (0 = none)");
        s->callback([&] {
            action = [&] {
                const Scenario sc = deserialize_scenario(read_text_file(scenario_path));
                SimulationOptions opt;
                opt.years = years;
                opt.seed = g.seed;
                opt.threads = g.threads;
                opt.block_years = block_years;
                opt.max_seconds = timeout;
                const auto t0 = Clock::now();
                const SimulationResult r = simulate(sc, opt);
                const double secs = seconds_since(t0);
                emit(g.out, penalty_table_to_csv(r.penalties, dense), out);
                nlohmann::json timer = {{"command", "simulate"}, {"seconds", secs},
                                        {"years", years},        {"slas", sc.slas.size()},
                                        {"links", sc.topology.n_links()}};
                (g.out.empty() ? err : out) << timer.dump() << '\n';
            };
        });
    }

    // build-dataset
    DatasetConfig dc;
    {
        CLI::App* s = sub("build-dataset", "Generate, simulate and split a training dataset");
        s->add_option("--topologies", dc.n_topologies, "Number of topologies");
        s->add_option("--router-min", dc.router_min, "Smallest router count");
        s->add_option("--router-max", dc.router_max, "Largest router count");
        s->add_option("--years", dc.years, "Years per topology");
        s->add_option("--rho-min", dc.rho_min, "Lower reservation factor");
        s->add_option("--rho-max", dc.rho_max, "Upper reservation factor");
        s->add_option("--train-fraction", dc.train_fraction, "Share of topologies for training");
        s->add_option("--test-fraction", dc.test_fraction, "Share of topologies for testing");
        s->add_option("--scale-km", dc.recipe.layout_scale_km, "Layout bounding-box diagonal in km");
        s->add_option("--timeout", dc.sim_timeout_seconds, "Per-topology simulation limit in seconds");
        s->callback([&] {
            action = [&] {
                if (g.out.empty()) throw CLI::RequiredError("--out (dataset directory)");
                dc.seed = g.seed;
                dc.threads = g.threads;
                const Dataset ds = build_dataset(dc);
                save_dataset(ds, g.out);
                nlohmann::json summary = {{"command", "build-dataset"},
                                          {"topologies", ds.records.size()},
                                          {"dropped", ds.dropped},
                                          {"examples", ds.example_count()},
                                          {"train", ds.example_count(Split::Train)},
                                          {"test", ds.example_count(Split::Test)},
                                          {"validation", ds.example_count(Split::Validation)}};
                out << summary.dump() << '\n';
            };
        });
    }

    // train
    TrainConfig tc;
    std::string data_dir, metrics_path;
    bool quiet = false;
    {
        CLI::App* s = sub("train", "Train the surrogate on a dataset directory");
        s->add_option("--data", data_dir, "Dataset directory")->required();
        s->add_option("--epochs", tc.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
        s->add_option("--batch", tc.batch_size, "Examples per batch")->check(CLI::PositiveNumber);
        s->add_option("--lr", tc.lr0, "Initial learning rate");
        s->add_option("--warm-epochs", tc.warm_epochs, "Epochs at the initial rate");
        s->add_option("--decay", tc.decay, "Per-epoch decay after the warm period");
        s->add_option("--patience", tc.patience, "Early-stopping patience (0 = off)");
        s->add_option("--max-steps", tc.max_steps, "Optimizer step limit (0 = none)");
        s->add_option("--hidden", tc.hyper.hidden_dim, "Hidden state width");
        s->add_option("--msg", tc.hyper.msg_dim, "Message width");
        s->add_option("--iterations", tc.hyper.iterations, "Message-passing rounds");
        s->add_option("--l2", tc.hyper.l2_coeff, "Message weight decay");
        s->add_option("--metrics", metrics_path, "Metrics CSV path");
        s->add_flag("--quiet", quiet, "No per-epoch progress");
        s->callback([&] {
            action = [&] {
                if (g.out.empty()) throw CLI::RequiredError("--out (checkpoint path)");
                tc.seed = g.seed;
                tc.threads = g.threads;
                const Dataset ds = load_dataset(data_dir);
                const auto t0 = Clock::now();
                const TrainResult r = train(tc, ds, [&](const EpochMetrics& m) {
                    if (!quiet) {
                        char buf[200];
                        std::snprintf(buf, sizeof buf, "epoch %d lr %.3g train %.5f test %.5f val %.5f (%.1fs)\n",
                                      m.epoch, m.lr, m.train_loss, m.test_loss, m.val_loss, m.seconds);
                        err << buf << std::flush;
                    }
                });
                write_text_file(g.out, save_checkpoint(r.best));
                if (!metrics_path.empty()) write_text_file(metrics_path, metrics_to_csv(r.metrics));
                nlohmann::json summary = {{"command", "train"},
                                          {"epochs", r.metrics.size()},
                                          {"steps", r.steps},
                                          {"best_epoch", r.best_epoch},
                                          {"seconds", seconds_since(t0)}};
                out << summary.dump() << '\n';
            };
        });
    }

    // evaluate / ppplot
    std::string ckpt_path, split_name_arg = "validation";
    bool baseline = false;
    auto load_split = [&](Checkpoint& ck) {
        ck = load_checkpoint(read_text_file(ckpt_path));
        const Dataset ds = load_dataset(data_dir);
        return prepare_split(ds, parse_split(split_name_arg), ck.stats);
    };
    {
        CLI::App* s = sub("evaluate", "Model and baseline NLL on a dataset split");
        s->add_option("--ckpt", ckpt_path, "Checkpoint JSON")->required();
        s->add_option("--data", data_dir, "Dataset directory")->required();
        s->add_option("--split", split_name_arg, "train, test or validation");
        s->callback([&] {
            action = [&] {
                Checkpoint ck;
                const PreparedSplit ps = load_split(ck);
                const EvaluationReport r = evaluate(ck.params, ck.hyper, ps, g.threads);
                emit(g.out, evaluation_to_json(r) + "\n", out);
            };
        });
    }
    {
        CLI::App* s = sub("ppplot", "Probability-plot data for a dataset split");
        s->add_option("--ckpt", ckpt_path, "Checkpoint JSON")->required();
        s->add_option("--data", data_dir, "Dataset directory")->required();
        s->add_option("--split", split_name_arg, "train, test or validation");
        s->add_flag("--baseline", baseline, "Use the standard t baseline instead of the model");
        s->callback([&] {
            action = [&] {
                Checkpoint ck;
                const PreparedSplit ps = load_split(ck);
                const FlatPredictions f =
                    baseline ? flatten_baseline(ps) : flatten(ps, predict_split(ck.params, ck.hyper, ps, g.threads));
                if (f.y.empty()) throw ParameterError("split " + split_name_arg + " is empty");
                const std::vector<double> grid = default_pp_grid();
                emit(g.out, ppplot_to_csv(ppplot(f.y, f.mu, f.sigma, grid, ck.hyper.nu)), out);
            };
        });
    }

    // predict / risk
    int mc_passes = 0;
    double level = 0.05;
    bool normalized = false;
    {
        CLI::App* s = sub("predict", "Predicted penalty distribution per SLA");
        s->add_option("--ckpt", ckpt_path, "Checkpoint JSON")->required();
        s->add_option("--scenario", scenario_path, "Scenario JSON")->required();
        s->add_option("--mc-passes", mc_passes, "Average this many dropout passes (0 = eval mode)");
        s->callback([&] {
            action = [&] {
                const Checkpoint ck = load_checkpoint(read_text_file(ckpt_path));
                const Scenario sc = deserialize_scenario(read_text_file(scenario_path));
                const auto t0 = Clock::now();
                const ModelInput in = prepare_input(sc, ck.stats);
                const PredictedDistribution d = mc_passes > 0
                                                    ? predict_mc_dropout(ck.params, ck.hyper, in, mc_passes, g.seed)
                                                    : forward(ck.params, ck.hyper, in);
                const double secs = seconds_since(t0);
                emit(g.out, predictions_csv(d, ck.stats), out);
                nlohmann::json timer = {{"command", "predict"}, {"seconds", secs}, {"slas", sc.slas.size()},
                                        {"links", sc.topology.n_links()}};
                (g.out.empty() ? err : out) << timer.dump() << '\n';
            };
        });
    }
    {
        CLI::App* s = sub("risk", "Per-SLA VaR and CVaR with the network CVaR bound");
        s->add_option("--ckpt", ckpt_path, "Checkpoint JSON")->required();
        s->add_option("--scenario", scenario_path, "Scenario JSON")->required();
        s->add_option("--p", level, "Tail mass")->check(CLI::Range(0.0, 1.0));
        s->add_flag("--normalized", normalized, "Report in normalized units");
        s->callback([&] {
            action = [&] {
                const Checkpoint ck = load_checkpoint(read_text_file(ckpt_path));
                const Scenario sc = deserialize_scenario(read_text_file(scenario_path));
                const PredictedDistribution d = forward(ck.params, ck.hyper, prepare_input(sc, ck.stats));
                RiskReport r = risk_report(d, level, normalized ? nullptr : &ck.stats);
                for (std::size_t k = 0; k < sc.slas.size(); ++k) r.sla_ids[k] = sc.slas[k].id;
                emit(g.out, risk_report_to_json(r) + "\n", out);
            };
        });
    }

    // import-sndlib
    std::string input_path, provision_path;
    {
        CLI::App* s = sub("import-sndlib", "Convert an SNDlib native file to topology JSON");
        s->add_option("--in", input_path, "SNDlib file")->required();
        s->add_option("--scenario", provision_path, "Also write a provisioned scenario here");
        s->add_option("--rho", recipe.rho, "Backup reservation factor for --scenario");
        s->add_option("--xi", recipe.xi, "Path-pair randomization for --scenario");
        s->callback([&] {
            action = [&] {
                const SndlibNetwork net = import_sndlib(read_text_file(input_path));
                emit(g.out, serialize_topology(net.topology), out);
                if (!provision_path.empty())
                    write_text_file(provision_path, serialize_scenario(provision_scenario(net.topology, recipe, g.seed)));
            };
        });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (action) action();
        return 0;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace risknet
