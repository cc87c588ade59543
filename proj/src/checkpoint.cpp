#include "risknet/checkpoint.hpp"

#include <map>

#include "json_util.hpp"
#include "risknet/error.hpp"

namespace risknet {

using nlohmann::json;

std::string save_checkpoint(const Checkpoint& ckpt) {
    json j;
    j["version"] = kCheckpointVersion;
    const Hyper& h = ckpt.hyper;
    j["hyper"] = {{"hidden_dim", h.hidden_dim}, {"msg_dim", h.msg_dim},       {"iterations", h.iterations},
                  {"dropout_rates", h.dropout_rates}, {"l2_coeff", h.l2_coeff}, {"nu", h.nu},
                  {"readout_sizes", h.readout_sizes}};
    const NormStats& s = ckpt.stats;
    j["norm_stats"] = {{"component_mean", s.component_mean}, {"component_std", s.component_std},
                       {"sla_mean", s.sla_mean},             {"sla_std", s.sla_std},
                       {"label_mean", s.label_mean},         {"label_std", s.label_std}};
    json tensors = json::array();
    for (const auto& [name, t] : ckpt.params.tensors()) {
        std::vector<double> values(t->data(), t->data() + t->size());
        tensors.push_back({{"name", name}, {"shape", {t->rows(), t->cols()}}, {"values", values}});
    }
    j["params"] = std::move(tensors);
    return j.dump();
}

Checkpoint load_checkpoint(const std::string& json_text) {
    const json j = detail::parse_json(json_text);
    detail::require_keys(j, "checkpoint", {"version", "hyper", "norm_stats", "params"});
    if (j.at("version") != kCheckpointVersion) throw ParseError("checkpoint: unsupported version");
    Checkpoint c;
    try {
        const json& h = j.at("hyper");
        detail::require_keys(h, "hyper",
                             {"hidden_dim", "msg_dim", "iterations", "dropout_rates", "l2_coeff", "nu", "readout_sizes"});
        c.hyper.hidden_dim = h.at("hidden_dim").get<int>();
        c.hyper.msg_dim = h.at("msg_dim").get<int>();
        c.hyper.iterations = h.at("iterations").get<int>();
        c.hyper.dropout_rates = h.at("dropout_rates").get<std::vector<double>>();
        c.hyper.l2_coeff = h.at("l2_coeff").get<double>();
        c.hyper.nu = h.at("nu").get<double>();
        c.hyper.readout_sizes = h.at("readout_sizes").get<std::vector<int>>();
        validate(c.hyper);

        const json& s = j.at("norm_stats");
        detail::require_keys(s, "norm_stats",
                             {"component_mean", "component_std", "sla_mean", "sla_std", "label_mean", "label_std"});
        c.stats.component_mean = s.at("component_mean").get<std::vector<double>>();
        c.stats.component_std = s.at("component_std").get<std::vector<double>>();
        c.stats.sla_mean = s.at("sla_mean").get<std::vector<double>>();
        c.stats.sla_std = s.at("sla_std").get<std::vector<double>>();
        c.stats.label_mean = s.at("label_mean").get<double>();
        c.stats.label_std = s.at("label_std").get<double>();
        if (c.stats.component_mean.size() != kComponentFeatures || c.stats.component_std.size() != kComponentFeatures ||
            c.stats.sla_mean.size() != kSlaFeatures || c.stats.sla_std.size() != kSlaFeatures)
            throw ParseError("checkpoint: normalizer width mismatch");
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    } catch (const ParameterError& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }

    c.params = init_params(c.hyper, 0);
    std::map<std::string, const json*> by_name;
    for (const json& t : j.at("params")) {
        detail::require_keys(t, "tensor", {"name", "shape", "values"});
        by_name[t.at("name").get<std::string>()] = &t;
    }
    auto tensors = c.params.tensors();
    if (by_name.size() != tensors.size()) throw ParseError("checkpoint: tensor count mismatch");
    for (auto& [name, m] : tensors) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ParseError("checkpoint: missing tensor " + name);
        const json& t = *it->second;
        const auto shape = t.at("shape").get<std::vector<long long>>();
        if (shape.size() != 2 || shape[0] != m->rows() || shape[1] != m->cols())
            throw ParseError("checkpoint: shape mismatch for " + name);
        const auto values = t.at("values").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != m->size())
            throw ParseError("checkpoint: value count mismatch for " + name);
        std::copy(values.begin(), values.end(), m->data());
    }
    return c;
}

}  // namespace risknet
