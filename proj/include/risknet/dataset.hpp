#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risknet/metagraph.hpp"
#include "risknet/model.hpp"
#include "risknet/provisioning.hpp"
#include "risknet/reliability.hpp"
#include "risknet/simulator.hpp"

namespace risknet {

/// Parameters of the synthetic scenario recipe: BA topology, spring layout
/// lengths, xi-randomized disjoint pairs, reliability, backup reservation.
struct ScenarioRecipe {
    int n_routers = 15;
    int ba_m = 2;
    int layout_iterations = 50;
    double layout_scale_km = 3000.0;
    double pair_fraction = 1.0;
    double xi = 0.1;
    int k_max = kDefaultCandidatePairs;
    double rho = 1.0;
    double penalty_rate = 1.0;
    ReliabilityDefaults reliability;
};

Scenario generate_scenario(const ScenarioRecipe& recipe, std::uint64_t seed);

/// Provisioning, reliability and reservation on an existing topology
/// (e.g. an imported SNDlib network).
Scenario provision_scenario(const Topology& topology, const ScenarioRecipe& recipe, std::uint64_t seed);

struct DatasetConfig {
    int n_topologies = 60;
    int router_min = 10;
    int router_max = 20;
    int years = 100;
    double rho_min = 0.5;
    double rho_max = 1.0;
    double train_fraction = 0.7;
    double test_fraction = 0.15;  // the remainder is validation
    ScenarioRecipe recipe;        // n_routers and rho are drawn per topology
    std::uint64_t seed = 1;
    int threads = 1;
    int block_years = 10;
    double sim_timeout_seconds = 0.0;  // 0 disables
};

/// Throws ParameterError for out-of-range sizes or fractions.
void validate(const DatasetConfig& config);

enum class Split { Train, Test, Validation };
const char* split_name(Split s);
Split parse_split(const std::string& name);

struct TopologyRecord {
    int id = 0;  // index in generation order
    Split split = Split::Train;
    Scenario scenario;
    PenaltyTable penalties;
};

struct Dataset {
    DatasetConfig config;
    std::vector<TopologyRecord> records;  // ascending id, dropped ones absent
    std::vector<int> dropped;             // ids whose simulation timed out
    NormStats stats;                      // fit on the train split only

    std::size_t example_count(Split s) const;
    std::size_t example_count() const;
};

/// Generates, simulates and splits every topology. Deterministic given the
/// seed and independent of the thread count.
Dataset build_dataset(const DatasetConfig& config);

/// Normalizer fit on the train records (features once per scenario, labels
/// over every (year, SLA) entry).
NormStats fit_dataset_normalizer(const std::vector<TopologyRecord>& records);

/// Directory layout: scenario_NNNN.json, penalties_NNNN.csv, manifest.json.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

/// FNV-1a hash used for the manifest's content fingerprints.
std::uint64_t fnv1a64(const std::string& text);

/// Model-ready view of one split: an input per topology and normalized labels
/// per (topology, year).
struct PreparedSplit {
    std::vector<ModelInput> inputs;
    std::vector<std::vector<double>> labels;  // one vector per example
    std::vector<std::size_t> owner;           // example -> index into inputs
    std::vector<int> record_ids;              // per input
    std::vector<int> years;                   // per example

    std::vector<Example> examples() const;
};

ModelInput prepare_input(const Scenario& scenario, const NormStats& stats);
PreparedSplit prepare_split(const Dataset& dataset, Split split, const NormStats& stats);

}  // namespace risknet
