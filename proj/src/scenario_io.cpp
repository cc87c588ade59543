#include "risknet/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "risknet/error.hpp"

namespace risknet {
namespace detail {

using nlohmann::json;

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

void require_keys(const json& j, const std::string& context,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
    if (!j.is_object()) throw ParseError(context + ": expected an object");
    for (const char* key : required)
        if (!j.contains(key)) throw ParseError(context + ": missing field '" + key + "'");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : required) known = known || item.key() == key;
        for (const char* key : optional) known = known || item.key() == key;
        if (!known) throw ParseError(context + ": unknown field '" + item.key() + "'");
    }
}

double get_number(const json& j, const char* key, const std::string& context) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ParseError(context + ": field '" + key + "' must be a number");
    return v.get<double>();
}

long long get_integer(const json& j, const char* key, const std::string& context) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ParseError(context + ": field '" + key + "' must be an integer");
    return v.get<long long>();
}

json topology_to_json(const Topology& topology) {
    json j;
    j["routers"] = topology.n_routers();
    json links = json::array();
    for (const Link& l : topology.links())
        links.push_back({{"id", l.id}, {"a", l.a}, {"b", l.b}, {"length_km", l.length_km},
                         {"backup_capacity", l.backup_capacity}});
    j["links"] = std::move(links);
    if (!topology.positions().empty()) {
        json pos = json::array();
        for (const Point& p : topology.positions()) pos.push_back({p.x, p.y});
        j["positions"] = std::move(pos);
    }
    return j;
}

Topology topology_from_json(const json& j) {
    const int n = static_cast<int>(get_integer(j, "routers", "topology"));
    if (!j.at("links").is_array()) throw ParseError("topology: 'links' must be an array");
    std::vector<Link> links;
    for (const json& lj : j.at("links")) {
        const std::string ctx = "link " + std::to_string(links.size());
        require_keys(lj, ctx, {"id", "a", "b", "length_km", "backup_capacity"});
        Link l;
        l.id = static_cast<LinkId>(get_integer(lj, "id", ctx));
        l.a = static_cast<RouterId>(get_integer(lj, "a", ctx));
        l.b = static_cast<RouterId>(get_integer(lj, "b", ctx));
        l.length_km = get_number(lj, "length_km", ctx);
        l.backup_capacity = get_number(lj, "backup_capacity", ctx);
        links.push_back(l);
    }
    std::vector<Point> positions;
    if (j.contains("positions")) {
        if (!j.at("positions").is_array()) throw ParseError("topology: 'positions' must be an array");
        for (const json& p : j.at("positions")) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ParseError("topology: positions must be [x, y] pairs");
            positions.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    try {
        return Topology(n, std::move(links), std::move(positions));
    } catch (const ParameterError& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
}

json scenario_to_json(const Scenario& s) {
    json j = topology_to_json(s.topology);
    json slas = json::array();
    for (const Sla& sla : s.slas)
        slas.push_back({{"id", sla.id}, {"src", sla.src}, {"dst", sla.dst}, {"demand", sla.demand},
                        {"working", sla.working}, {"backup", sla.backup}});
    j["slas"] = std::move(slas);
    json rel = json::array();
    for (std::size_t i = 0; i < s.reliability.size(); ++i) {
        const auto& r = s.reliability[i];
        rel.push_back({{"link", i}, {"lambda_per_year", r.lambda_per_year},
                       {"pareto_alpha", r.pareto_alpha}, {"pareto_beta_h", r.pareto_beta_h}});
    }
    j["reliability"] = std::move(rel);
    j["penalty_rate"] = s.penalty_rate;
    j["meta"] = {{"seed", s.meta.seed}, {"xi", s.meta.xi}, {"rho", s.meta.rho},
                 {"pair_fraction", s.meta.pair_fraction}, {"ba_m", s.meta.ba_m}};
    return j;
}

namespace {

Path path_from_json(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + ": path must be an array of link ids");
    Path p;
    for (const json& v : j) {
        if (!v.is_number_integer()) throw ParseError(ctx + ": link ids must be integers");
        p.push_back(v.get<LinkId>());
    }
    return p;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    require_keys(j, "scenario", {"routers", "links", "slas", "reliability"},
                 {"positions", "penalty_rate", "meta"});
    Scenario s;
    s.topology = topology_from_json(j);
    if (!j.at("slas").is_array()) throw ParseError("scenario: 'slas' must be an array");
    for (const json& sj : j.at("slas")) {
        const std::string ctx = "sla " + std::to_string(s.slas.size());
        require_keys(sj, ctx, {"id", "src", "dst", "demand", "working", "backup"});
        Sla sla;
        sla.id = static_cast<int>(get_integer(sj, "id", ctx));
        sla.src = static_cast<RouterId>(get_integer(sj, "src", ctx));
        sla.dst = static_cast<RouterId>(get_integer(sj, "dst", ctx));
        sla.demand = get_number(sj, "demand", ctx);
        sla.working = path_from_json(sj.at("working"), ctx);
        sla.backup = path_from_json(sj.at("backup"), ctx);
        s.slas.push_back(std::move(sla));
    }
    if (!j.at("reliability").is_array()) throw ParseError("scenario: 'reliability' must be an array");
    s.reliability.resize(static_cast<std::size_t>(s.topology.n_links()));
    std::vector<char> seen(s.reliability.size(), 0);
    for (const json& rj : j.at("reliability")) {
        const std::string ctx = "reliability entry";
        require_keys(rj, ctx, {"link", "lambda_per_year", "pareto_alpha", "pareto_beta_h"});
        const long long link = get_integer(rj, "link", ctx);
        if (link < 0 || link >= s.topology.n_links() || seen[static_cast<std::size_t>(link)])
            throw ParseError("reliability: bad or duplicate link " + std::to_string(link));
        seen[static_cast<std::size_t>(link)] = 1;
        auto& r = s.reliability[static_cast<std::size_t>(link)];
        r.lambda_per_year = get_number(rj, "lambda_per_year", ctx);
        r.pareto_alpha = get_number(rj, "pareto_alpha", ctx);
        r.pareto_beta_h = get_number(rj, "pareto_beta_h", ctx);
    }
    for (char c : seen)
        if (!c) throw ParseError("reliability: every link needs an entry");
    if (j.contains("penalty_rate")) s.penalty_rate = get_number(j, "penalty_rate", "scenario");
    if (j.contains("meta")) {
        const json& m = j.at("meta");
        require_keys(m, "meta", {}, {"seed", "xi", "rho", "pair_fraction", "ba_m"});
        if (m.contains("seed")) s.meta.seed = m.at("seed").get<std::uint64_t>();
        if (m.contains("xi")) s.meta.xi = get_number(m, "xi", "meta");
        if (m.contains("rho")) s.meta.rho = get_number(m, "rho", "meta");
        if (m.contains("pair_fraction")) s.meta.pair_fraction = get_number(m, "pair_fraction", "meta");
        if (m.contains("ba_m")) s.meta.ba_m = static_cast<int>(get_integer(m, "ba_m", "meta"));
    }
    try {
        validate_scenario(s);
    } catch (const ParameterError& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    return s;
}

}  // namespace detail

std::string serialize_scenario(const Scenario& scenario) {
    return detail::scenario_to_json(scenario).dump();
}

Scenario deserialize_scenario(const std::string& json_text) {
    return detail::scenario_from_json(detail::parse_json(json_text));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParameterError("cannot write " + path);
    out << text;
    if (!out) throw ParameterError("write failed for " + path);
}

}  // namespace risknet
