#include "risknet/provisioning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "risknet/error.hpp"

namespace risknet {

std::vector<RouterId> path_routers(const Topology& topology, RouterId src, RouterId dst,
                                   const Path& path) {
    if (path.empty()) throw ParameterError("empty path");
    std::vector<RouterId> routers{src};
    std::vector<char> seen(static_cast<std::size_t>(topology.n_routers()), 0);
    seen[static_cast<std::size_t>(src)] = 1;
    RouterId at = src;
    for (LinkId id : path) {
        if (id < 0 || id >= topology.n_links())
            throw ParameterError("path references unknown link " + std::to_string(id));
        const Link& l = topology.link(id);
        if (l.a != at && l.b != at)
            throw ParameterError("path is not contiguous at link " + std::to_string(id));
        at = l.other(at);
        if (seen[static_cast<std::size_t>(at)])
            throw ParameterError("path revisits router " + std::to_string(at));
        seen[static_cast<std::size_t>(at)] = 1;
        routers.push_back(at);
    }
    if (at != dst) throw ParameterError("path does not end at its destination");
    return routers;
}

void validate_sla(const Topology& topology, const Sla& sla) {
    const std::string tag = "SLA " + std::to_string(sla.id) + ": ";
    if (sla.src == sla.dst) throw ParameterError(tag + "src equals dst");
    if (sla.src < 0 || sla.dst < 0 || sla.src >= topology.n_routers() ||
        sla.dst >= topology.n_routers())
        throw ParameterError(tag + "unknown endpoint");
    if (!(sla.demand > 0.0) || !std::isfinite(sla.demand))
        throw ParameterError(tag + "demand must be positive");
    std::vector<RouterId> w, b;
    try {
        w = path_routers(topology, sla.src, sla.dst, sla.working);
        b = path_routers(topology, sla.src, sla.dst, sla.backup);
    } catch (const ParameterError& e) {
        throw ParameterError(tag + e.what());
    }
    std::set<RouterId> inner(w.begin() + 1, w.end() - 1);
    for (std::size_t i = 1; i + 1 < b.size(); ++i)
        if (inner.count(b[i])) throw ParameterError(tag + "paths share router " + std::to_string(b[i]));
    for (LinkId l : sla.backup)
        if (std::find(sla.working.begin(), sla.working.end(), l) != sla.working.end())
            throw ParameterError(tag + "paths share link " + std::to_string(l));
}

void validate_scenario(const Scenario& scenario) {
    const Topology& t = scenario.topology;
    if (static_cast<int>(scenario.reliability.size()) != t.n_links())
        throw ParameterError("reliability entries must cover every link");
    for (const auto& rel : scenario.reliability) validate(rel);
    if (!(scenario.penalty_rate >= 0.0) || !std::isfinite(scenario.penalty_rate))
        throw ParameterError("penalty rate must be non-negative");
    for (std::size_t k = 0; k < scenario.slas.size(); ++k) {
        if (scenario.slas[k].id != static_cast<int>(k))
            throw ParameterError("SLA ids must be dense and ordered");
        validate_sla(t, scenario.slas[k]);
    }
}

Path shortest_path(const Topology& topology, RouterId src, RouterId dst,
                   const std::vector<char>& banned_routers, const std::vector<char>& banned_links) {
    const auto n = static_cast<std::size_t>(topology.n_routers());
    auto banned_r = [&](RouterId r) {
        return !banned_routers.empty() && banned_routers[static_cast<std::size_t>(r)];
    };
    auto banned_l = [&](LinkId l) {
        return !banned_links.empty() && banned_links[static_cast<std::size_t>(l)];
    };
    if (banned_r(src) || banned_r(dst)) return {};
    std::vector<LinkId> via(n, -1);
    std::vector<char> seen(n, 0);
    std::deque<RouterId> queue{src};
    seen[static_cast<std::size_t>(src)] = 1;
    while (!queue.empty()) {
        RouterId r = queue.front();
        queue.pop_front();
        if (r == dst) break;
        for (const Adjacent& adj : topology.adjacency(r)) {
            auto nb = static_cast<std::size_t>(adj.neighbor);
            if (seen[nb] || banned_r(adj.neighbor) || banned_l(adj.link)) continue;
            seen[nb] = 1;
            via[nb] = adj.link;
            queue.push_back(adj.neighbor);
        }
    }
    if (!seen[static_cast<std::size_t>(dst)] || src == dst) return {};
    Path path;
    for (RouterId at = dst; at != src;) {
        LinkId l = via[static_cast<std::size_t>(at)];
        path.push_back(l);
        at = topology.link(l).other(at);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Path> k_shortest_paths(const Topology& topology, RouterId src, RouterId dst, int k) {
    std::vector<Path> accepted;
    if (k <= 0 || src == dst) return accepted;
    const auto n = static_cast<std::size_t>(topology.n_routers());
    const auto n_links = static_cast<std::size_t>(topology.n_links());

    Path first = shortest_path(topology, src, dst, {}, {});
    if (first.empty()) return accepted;

    using Keyed = std::pair<std::vector<RouterId>, Path>;  // routers identify a simple path
    auto order = [](const Keyed& x, const Keyed& y) {
        if (x.second.size() != y.second.size()) return x.second.size() < y.second.size();
        return x.first < y.first;
    };
    std::set<Keyed, decltype(order)> pending(order);
    std::vector<std::vector<RouterId>> accepted_routers;
    accepted.push_back(first);
    accepted_routers.push_back(path_routers(topology, src, dst, first));

    while (static_cast<int>(accepted.size()) < k) {
        const Path& prev = accepted.back();
        const std::vector<RouterId> prev_routers = accepted_routers.back();
        for (std::size_t i = 0; i + 1 < prev_routers.size(); ++i) {
            std::vector<char> banned_routers(n, 0), banned_links(n_links, 0);
            for (std::size_t a = 0; a < accepted.size(); ++a) {
                const auto& rr = accepted_routers[a];
                if (rr.size() > i + 1 && std::equal(rr.begin(), rr.begin() + static_cast<long>(i) + 1,
                                                    prev_routers.begin()))
                    banned_links[static_cast<std::size_t>(accepted[a][i])] = 1;
            }
            for (std::size_t r = 0; r < i; ++r) banned_routers[static_cast<std::size_t>(prev_routers[r])] = 1;
            Path spur = shortest_path(topology, prev_routers[i], dst, banned_routers, banned_links);
            if (spur.empty()) continue;
            Path candidate(prev.begin(), prev.begin() + static_cast<long>(i));
            candidate.insert(candidate.end(), spur.begin(), spur.end());
            std::vector<RouterId> routers = path_routers(topology, src, dst, candidate);
            if (std::find(accepted_routers.begin(), accepted_routers.end(), routers) !=
                accepted_routers.end())
                continue;
            pending.emplace(std::move(routers), std::move(candidate));
        }
        if (pending.empty()) break;
        auto best = pending.begin();
        accepted.push_back(best->second);
        accepted_routers.push_back(best->first);
        pending.erase(best);
    }
    return accepted;
}

std::vector<PathPair> candidate_pairs(const Topology& topology, RouterId src, RouterId dst,
                                      int k_max) {
    if (src == dst) throw ParameterError("candidate pairs need distinct endpoints");
    std::vector<PathPair> pairs;
    const auto n = static_cast<std::size_t>(topology.n_routers());
    const auto n_links = static_cast<std::size_t>(topology.n_links());
    for (Path& working : k_shortest_paths(topology, src, dst, k_max)) {
        std::vector<char> banned_routers(n, 0), banned_links(n_links, 0);
        std::vector<RouterId> routers = path_routers(topology, src, dst, working);
        for (std::size_t i = 1; i + 1 < routers.size(); ++i)
            banned_routers[static_cast<std::size_t>(routers[i])] = 1;
        for (LinkId l : working) banned_links[static_cast<std::size_t>(l)] = 1;
        Path backup = shortest_path(topology, src, dst, banned_routers, banned_links);
        if (backup.empty()) continue;
        pairs.push_back({std::move(working), std::move(backup)});
    }
    return pairs;
}

std::vector<double> pair_probabilities(const std::vector<PathPair>& candidates, double xi) {
    if (candidates.empty()) throw ParameterError("no candidate path pairs");
    if (!(xi >= 0.0)) throw ParameterError("xi must be non-negative");
    std::size_t shortest = candidates.front().total_hops();
    for (const auto& c : candidates) shortest = std::min(shortest, c.total_hops());
    std::vector<double> p;
    p.reserve(candidates.size());
    double total = 0.0;
    for (const auto& c : candidates) {
        // Shifting by the shortest length leaves the normalized weights unchanged.
        p.push_back(std::exp(-xi * static_cast<double>(c.total_hops() - shortest)));
        total += p.back();
    }
    for (double& v : p) v /= total;
    return p;
}

const PathPair& sample_pair(const std::vector<PathPair>& candidates, double xi, Rng& rng) {
    const std::vector<double> p = pair_probabilities(candidates, xi);
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return candidates[i];
    }
    return candidates.back();
}

std::vector<double> router_sizes(const Topology& topology, Rng& rng) {
    std::vector<double> sizes;
    sizes.reserve(static_cast<std::size_t>(topology.n_routers()));
    for (RouterId r = 0; r < topology.n_routers(); ++r) {
        const double d = topology.degree(r);
        sizes.push_back(rng.uniform(10.0 * (d - 1.0), 10.0 * (d + 1.0)));
    }
    return sizes;
}

std::map<std::pair<RouterId, RouterId>, double> assign_demands(const Topology& topology, Rng& rng) {
    const std::vector<double> sizes = router_sizes(topology, rng);
    std::map<std::pair<RouterId, RouterId>, double> demands;
    for (RouterId a = 0; a < topology.n_routers(); ++a)
        for (RouterId b = a + 1; b < topology.n_routers(); ++b)
            demands[{a, b}] = sizes[static_cast<std::size_t>(a)] * sizes[static_cast<std::size_t>(b)] /
                              kDemandDivisor;
    return demands;
}

SlaBuildResult build_slas(const Topology& topology, double pair_fraction, double xi, Rng& rng,
                          int k_max) {
    if (!(pair_fraction > 0.0 && pair_fraction <= 1.0))
        throw ParameterError("pair_fraction must lie in (0, 1]");
    SlaBuildResult result;
    const std::vector<double> sizes = router_sizes(topology, rng);
    for (RouterId a = 0; a < topology.n_routers(); ++a) {
        for (RouterId b = a + 1; b < topology.n_routers(); ++b) {
            if (!(rng.uniform01() < pair_fraction)) continue;
            std::vector<PathPair> candidates = candidate_pairs(topology, a, b, k_max);
            if (candidates.empty()) {
                ++result.skipped;
                continue;
            }
            const PathPair& chosen = sample_pair(candidates, xi, rng);
            Sla sla;
            sla.id = static_cast<int>(result.slas.size());
            sla.src = a;
            sla.dst = b;
            sla.demand = sizes[static_cast<std::size_t>(a)] * sizes[static_cast<std::size_t>(b)] /
                         kDemandDivisor;
            sla.working = chosen.working;
            sla.backup = chosen.backup;
            result.slas.push_back(std::move(sla));
        }
    }
    return result;
}

std::vector<double> single_failure_requirements(const Topology& topology,
                                                const std::vector<Sla>& slas) {
    const auto L = static_cast<std::size_t>(topology.n_links());
    std::vector<double> load(L * L, 0.0);
    for (const Sla& s : slas)
        for (LinkId f : s.working)
            for (LinkId l : s.backup) load[static_cast<std::size_t>(f) * L + static_cast<std::size_t>(l)] += s.demand;
    return load;
}

Scenario reserve_backup_capacity(const Scenario& scenario, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be positive");
    const Topology& t = scenario.topology;
    const auto L = static_cast<std::size_t>(t.n_links());
    const std::vector<double> load = single_failure_requirements(t, scenario.slas);
    std::vector<double> capacity(L, 0.0);
    for (std::size_t f = 0; f < L; ++f)
        for (std::size_t l = 0; l < L; ++l) capacity[l] = std::max(capacity[l], load[f * L + l]);
    for (double& c : capacity) c *= rho;
    Scenario out = scenario;
    out.topology = t.with_backup_capacities(capacity);
    out.meta.rho = rho;
    return out;
}

}  // namespace risknet
