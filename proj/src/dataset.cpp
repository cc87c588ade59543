#include "risknet/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "json_util.hpp"
#include "risknet/error.hpp"
#include "risknet/parallel.hpp"
#include "risknet/scenario_io.hpp"

namespace risknet {

using nlohmann::json;

Scenario provision_scenario(const Topology& topology, const ScenarioRecipe& recipe, std::uint64_t seed) {
    Rng provisioning(derive_seed(seed, {2}));
    SlaBuildResult built = build_slas(topology, recipe.pair_fraction, recipe.xi, provisioning, recipe.k_max);
    Rng reliability(derive_seed(seed, {3}));
    Scenario s;
    s.topology = topology;
    s.slas = std::move(built.slas);
    for (const Link& l : topology.links()) s.reliability.push_back(default_reliability(l, reliability, recipe.reliability));
    s.penalty_rate = recipe.penalty_rate;
    s.meta = {seed, recipe.xi, recipe.rho, recipe.pair_fraction, recipe.ba_m};
    return reserve_backup_capacity(s, recipe.rho);
}

Scenario generate_scenario(const ScenarioRecipe& recipe, std::uint64_t seed) {
    Topology t = generate_ba(recipe.n_routers, recipe.ba_m, derive_seed(seed, {0}));
    const auto positions = spring_layout(t, recipe.layout_iterations, recipe.layout_scale_km, derive_seed(seed, {1}));
    return provision_scenario(assign_link_lengths(t, positions), recipe, seed);
}

void validate(const DatasetConfig& c) {
    if (c.n_topologies < 1) throw ParameterError("need at least one topology");
    if (c.router_min < 3 || c.router_max > 1000 || c.router_min > c.router_max)
        throw ParameterError("router range must lie within [3, 1000]");
    if (c.router_min < c.recipe.ba_m + 1) throw ParameterError("router range too small for the BA seed clique");
    if (c.years < 1) throw ParameterError("years must be >= 1");
    if (!(c.rho_min > 0.0 && c.rho_min <= c.rho_max)) throw ParameterError("bad rho range");
    if (!(c.train_fraction > 0.0 && c.test_fraction >= 0.0 && c.train_fraction + c.test_fraction <= 1.0))
        throw ParameterError("bad split fractions");
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Validation: return "validation";
    }
    return "?";
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "test") return Split::Test;
    if (name == "validation" || name == "val") return Split::Validation;
    throw ParameterError("unknown split '" + name + "'");
}

std::size_t Dataset::example_count(Split s) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.split == s) n += static_cast<std::size_t>(r.penalties.years());
    return n;
}

std::size_t Dataset::example_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += static_cast<std::size_t>(r.penalties.years());
    return n;
}

NormStats fit_dataset_normalizer(const std::vector<TopologyRecord>& records) {
    std::vector<FeatureSet> features;
    std::vector<double> labels;
    for (const auto& r : records) {
        if (r.split != Split::Train) continue;
        features.push_back(extract_features(r.scenario));
        labels.insert(labels.end(), r.penalties.values().begin(), r.penalties.values().end());
    }
    return fit_normalizer(features, labels);
}

Dataset build_dataset(const DatasetConfig& config) {
    validate(config);
    const auto n = static_cast<std::size_t>(config.n_topologies);
    std::vector<TopologyRecord> slots(n);
    std::vector<char> ok(n, 0);

    parallel_for(n, config.threads, [&](std::size_t i) {
        const std::uint64_t topo_seed = derive_seed(config.seed, {i});
        Rng rng(topo_seed);
        ScenarioRecipe recipe = config.recipe;
        recipe.n_routers = config.router_min + static_cast<int>(rng.index(
                                                   static_cast<std::uint64_t>(config.router_max - config.router_min + 1)));
        recipe.rho = rng.uniform(config.rho_min, config.rho_max);
        TopologyRecord rec;
        rec.id = static_cast<int>(i);
        rec.scenario = generate_scenario(recipe, derive_seed(topo_seed, {1}));
        SimulationOptions opt;
        opt.years = config.years;
        opt.seed = derive_seed(topo_seed, {2});
        opt.block_years = config.block_years;
        opt.max_seconds = config.sim_timeout_seconds;
        try {
            rec.penalties = simulate(rec.scenario, opt).penalties;
        } catch (const SimulationTimeout& e) {
            std::cerr << "topology " << i << " dropped: " << e.what() << '\n';
            return;
        }
        slots[i] = std::move(rec);
        ok[i] = 1;
    });

    Dataset ds;
    ds.config = config;
    std::vector<int> kept;
    for (std::size_t i = 0; i < n; ++i) {
        if (ok[i])
            kept.push_back(static_cast<int>(i));
        else
            ds.dropped.push_back(static_cast<int>(i));
    }
    // Topology-level split: a scenario never contributes to two splits.
    Rng split_rng(derive_seed(config.seed, {0x5b1175ULL}));
    std::vector<int> order = kept;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[split_rng.index(i)]);
    const auto n_train = static_cast<std::size_t>(std::max(1.0, std::round(config.train_fraction * order.size())));
    const auto n_test = static_cast<std::size_t>(std::round(config.test_fraction * order.size()));
    std::vector<Split> assignment(n, Split::Validation);
    for (std::size_t i = 0; i < order.size(); ++i)
        assignment[static_cast<std::size_t>(order[i])] =
            i < n_train ? Split::Train : (i < n_train + n_test ? Split::Test : Split::Validation);

    for (int id : kept) {
        TopologyRecord& r = slots[static_cast<std::size_t>(id)];
        r.split = assignment[static_cast<std::size_t>(id)];
        ds.records.push_back(std::move(r));
    }
    ds.stats = fit_dataset_normalizer(ds.records);
    return ds;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

json config_to_json(const DatasetConfig& c) {
    const ScenarioRecipe& r = c.recipe;
    return {{"n_topologies", c.n_topologies},
            {"router_min", c.router_min},
            {"router_max", c.router_max},
            {"years", c.years},
            {"rho_min", c.rho_min},
            {"rho_max", c.rho_max},
            {"train_fraction", c.train_fraction},
            {"test_fraction", c.test_fraction},
            {"seed", c.seed},
            {"block_years", c.block_years},
            {"recipe",
             {{"ba_m", r.ba_m},
              {"layout_iterations", r.layout_iterations},
              {"layout_scale_km", r.layout_scale_km},
              {"pair_fraction", r.pair_fraction},
              {"xi", r.xi},
              {"k_max", r.k_max},
              {"penalty_rate", r.penalty_rate},
              {"lambda_per_km_year", r.reliability.lambda_per_km_year},
              {"alpha_range", {r.reliability.alpha_min, r.reliability.alpha_max}},
              {"beta_range_h", {r.reliability.beta_min_h, r.reliability.beta_max_h}}}}};
}

DatasetConfig config_from_json(const json& j) {
    DatasetConfig c;
    c.n_topologies = j.at("n_topologies").get<int>();
    c.router_min = j.at("router_min").get<int>();
    c.router_max = j.at("router_max").get<int>();
    c.years = j.at("years").get<int>();
    c.rho_min = j.at("rho_min").get<double>();
    c.rho_max = j.at("rho_max").get<double>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.block_years = j.at("block_years").get<int>();
    const json& r = j.at("recipe");
    c.recipe.ba_m = r.at("ba_m").get<int>();
    c.recipe.layout_iterations = r.at("layout_iterations").get<int>();
    c.recipe.layout_scale_km = r.at("layout_scale_km").get<double>();
    c.recipe.pair_fraction = r.at("pair_fraction").get<double>();
    c.recipe.xi = r.at("xi").get<double>();
    c.recipe.k_max = r.at("k_max").get<int>();
    c.recipe.penalty_rate = r.at("penalty_rate").get<double>();
    c.recipe.reliability.lambda_per_km_year = r.at("lambda_per_km_year").get<double>();
    c.recipe.reliability.alpha_min = r.at("alpha_range").at(0).get<double>();
    c.recipe.reliability.alpha_max = r.at("alpha_range").at(1).get<double>();
    c.recipe.reliability.beta_min_h = r.at("beta_range_h").at(0).get<double>();
    c.recipe.reliability.beta_max_h = r.at("beta_range_h").at(1).get<double>();
    return c;
}

json stats_to_json(const NormStats& s) {
    return {{"component_mean", s.component_mean}, {"component_std", s.component_std},
            {"sla_mean", s.sla_mean},             {"sla_std", s.sla_std},
            {"label_mean", s.label_mean},         {"label_std", s.label_std}};
}

NormStats stats_from_json(const json& j) {
    NormStats s;
    s.component_mean = j.at("component_mean").get<std::vector<double>>();
    s.component_std = j.at("component_std").get<std::vector<double>>();
    s.sla_mean = j.at("sla_mean").get<std::vector<double>>();
    s.sla_std = j.at("sla_std").get<std::vector<double>>();
    s.label_mean = j.at("label_mean").get<double>();
    s.label_std = j.at("label_std").get<double>();
    return s;
}

std::string file_stem(const char* prefix, int id, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, id, ext);
    return buf;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json records = json::array();
    json splits = {{"train", json::array()}, {"test", json::array()}, {"validation", json::array()}};
    for (const auto& r : ds.records) {
        const std::string scenario_text = serialize_scenario(r.scenario);
        const std::string penalty_text = penalty_table_to_csv(r.penalties);
        const std::string sfile = file_stem("scenario", r.id, "json");
        const std::string pfile = file_stem("penalties", r.id, "csv");
        write_text_file(dir + "/" + sfile, scenario_text);
        write_text_file(dir + "/" + pfile, penalty_text);
        records.push_back({{"id", r.id},
                           {"split", split_name(r.split)},
                           {"scenario", sfile},
                           {"penalties", pfile},
                           {"years", r.penalties.years()},
                           {"n_slas", r.penalties.n_slas()},
                           {"scenario_hash", fnv1a64(scenario_text)},
                           {"penalties_hash", fnv1a64(penalty_text)}});
        splits[split_name(r.split)].push_back(r.id);
    }
    json manifest = {{"version", "risknet-dataset-1"},
                     {"config", config_to_json(ds.config)},
                     {"splits", splits},
                     {"norm_stats", stats_to_json(ds.stats)},
                     {"examples", ds.example_count()},
                     {"dropped", ds.dropped},
                     {"records", records}};
    write_text_file(dir + "/manifest.json", manifest.dump(2));
}

Dataset load_dataset(const std::string& dir) {
    const json m = detail::parse_json(read_text_file(dir + "/manifest.json"));
    Dataset ds;
    try {
        if (m.at("version") != "risknet-dataset-1") throw ParseError("dataset: unsupported manifest version");
        ds.config = config_from_json(m.at("config"));
        ds.stats = stats_from_json(m.at("norm_stats"));
        ds.dropped = m.at("dropped").get<std::vector<int>>();
        for (const json& rj : m.at("records")) {
            TopologyRecord r;
            r.id = rj.at("id").get<int>();
            r.split = parse_split(rj.at("split").get<std::string>());
            const std::string stext = read_text_file(dir + "/" + rj.at("scenario").get<std::string>());
            const std::string ptext = read_text_file(dir + "/" + rj.at("penalties").get<std::string>());
            if (fnv1a64(stext) != rj.at("scenario_hash").get<std::uint64_t>() ||
                fnv1a64(ptext) != rj.at("penalties_hash").get<std::uint64_t>())
                throw ParseError("dataset: content hash mismatch for record " + std::to_string(r.id));
            r.scenario = deserialize_scenario(stext);
            r.penalties = penalty_table_from_csv(ptext);
            if (r.penalties.n_slas() != static_cast<int>(r.scenario.slas.size()))
                throw ParseError("dataset: penalty table does not match scenario " + std::to_string(r.id));
            ds.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("dataset manifest: ") + e.what());
    } catch (const ParameterError& e) {
        throw ParseError(std::string("dataset manifest: ") + e.what());
    }
    return ds;
}

ModelInput prepare_input(const Scenario& scenario, const NormStats& stats) {
    return ModelInput::build(build_metagraph(scenario), normalize_features(stats, extract_features(scenario)));
}

std::vector<Example> PreparedSplit::examples() const {
    std::vector<Example> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({&inputs[owner[i]], labels[i]});
    return out;
}

PreparedSplit prepare_split(const Dataset& dataset, Split split, const NormStats& stats) {
    PreparedSplit ps;
    for (const auto& r : dataset.records) {
        if (r.split != split) continue;
        const std::size_t slot = ps.inputs.size();
        ps.inputs.push_back(prepare_input(r.scenario, stats));
        ps.record_ids.push_back(r.id);
        for (int y = 0; y < r.penalties.years(); ++y) {
            std::vector<double> row(static_cast<std::size_t>(r.penalties.n_slas()));
            for (int k = 0; k < r.penalties.n_slas(); ++k)
                row[static_cast<std::size_t>(k)] = normalize_label(stats, r.penalties.at(y, k));
            ps.labels.push_back(std::move(row));
            ps.owner.push_back(slot);
            ps.years.push_back(y);
        }
    }
    return ps;
}

}  // namespace risknet
