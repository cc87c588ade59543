#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "risknet/reliability.hpp"
#include "risknet/rng.hpp"
#include "risknet/topology.hpp"

namespace risknet {

/// A path as an ordered list of link ids from src to dst.
using Path = std::vector<LinkId>;

struct PathPair {
    Path working;
    Path backup;
    std::size_t total_hops() const { return working.size() + backup.size(); }
    bool operator==(const PathPair&) const = default;
};

struct Sla {
    int id = 0;
    RouterId src = 0;
    RouterId dst = 0;
    double demand = 1.0;
    Path working;
    Path backup;
    bool operator==(const Sla&) const = default;
};

struct ScenarioMeta {
    std::uint64_t seed = 0;
    double xi = 0.1;
    double rho = 1.0;
    double pair_fraction = 1.0;
    int ba_m = 2;
    bool operator==(const ScenarioMeta&) const = default;
};

/// One complete simulatable instance.
struct Scenario {
    Topology topology;
    std::vector<Sla> slas;
    std::vector<ComponentReliability> reliability;  // indexed by LinkId
    double penalty_rate = 1.0;                      // per demand unit per hour down
    ScenarioMeta meta;
    bool operator==(const Scenario&) const = default;
};

/// Routers visited by a path starting at src; throws ParameterError if the
/// links do not form a simple src->dst path.
std::vector<RouterId> path_routers(const Topology& topology, RouterId src, RouterId dst,
                                   const Path& path);

/// Structural check of one SLA: both paths simple, connecting src and dst,
/// router-disjoint except at the ends, link-disjoint.
void validate_sla(const Topology& topology, const Sla& sla);

/// Full scenario check (paths, ids, reliability entries, capacities).
void validate_scenario(const Scenario& scenario);

/// Hop-metric shortest path (BFS, ties broken by router then link id).
/// Routers / links flagged in the masks are excluded. Empty if unreachable.
Path shortest_path(const Topology& topology, RouterId src, RouterId dst,
                   const std::vector<char>& banned_routers, const std::vector<char>& banned_links);

/// Up to k shortest simple paths in hop metric, ordered by (hops, router sequence).
std::vector<Path> k_shortest_paths(const Topology& topology, RouterId src, RouterId dst, int k);

inline constexpr int kDefaultCandidatePairs = 16;

/// Working paths from k-shortest enumeration, each paired with the shortest
/// router-disjoint backup in the pruned graph. Pairs without a backup are dropped.
std::vector<PathPair> candidate_pairs(const Topology& topology, RouterId src, RouterId dst,
                                      int k_max = kDefaultCandidatePairs);

/// Selection probabilities proportional to exp(-xi * total hops).
std::vector<double> pair_probabilities(const std::vector<PathPair>& candidates, double xi);

const PathPair& sample_pair(const std::vector<PathPair>& candidates, double xi, Rng& rng);

/// Router sizes ~ U[10(d-1), 10(d+1)], demand = size(src) * size(dst) / 100.
/// Keys are ordered (src < dst) pairs.
inline constexpr double kDemandDivisor = 100.0;
std::vector<double> router_sizes(const Topology& topology, Rng& rng);
std::map<std::pair<RouterId, RouterId>, double> assign_demands(const Topology& topology, Rng& rng);

struct SlaBuildResult {
    std::vector<Sla> slas;
    int skipped = 0;  // router pairs without any disjoint pair
};

SlaBuildResult build_slas(const Topology& topology, double pair_fraction, double xi, Rng& rng,
                          int k_max = kDefaultCandidatePairs);

/// Single-failure backup load: load[f][l] = sum of demands of SLAs whose
/// working path uses f and whose backup uses l.
std::vector<double> single_failure_requirements(const Topology& topology,
                                                const std::vector<Sla>& slas);

/// Exact single-failure SBPP dimensioning scaled by rho.
Scenario reserve_backup_capacity(const Scenario& scenario, double rho);

}  // namespace risknet
