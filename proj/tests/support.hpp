#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "risknet/provisioning.hpp"
#include "risknet/topology.hpp"

namespace testing {

using namespace risknet;

inline Topology make_topology(int n, const std::vector<std::pair<int, int>>& edges, double length = 100.0) {
    std::vector<Link> links;
    for (std::size_t i = 0; i < edges.size(); ++i)
        links.push_back({static_cast<LinkId>(i), edges[i].first, edges[i].second, length, 0.0});
    return Topology(n, links);
}

struct SlaSpec {
    RouterId src, dst;
    double demand;
    Path working, backup;
};

/// Scenario with hand-written SLAs, uniform reliability and exact reservation.
inline Scenario make_scenario(const Topology& topo, const std::vector<SlaSpec>& specs, double rho = 1.0,
                              ComponentReliability rel = {1.0, 2.0, 1.0}) {
    Scenario s;
    s.topology = topo;
    for (std::size_t i = 0; i < specs.size(); ++i)
        s.slas.push_back({static_cast<int>(i), specs[i].src, specs[i].dst, specs[i].demand, specs[i].working,
                          specs[i].backup});
    s.reliability.assign(static_cast<std::size_t>(topo.n_links()), rel);
    return reserve_backup_capacity(s, rho);
}

/// Two SLAs (demands 4 and 5) with distinct working links whose backups share
/// link 3; exact reservation gives that link capacity 5.
///   SLA 0: 0 -L0- 1, backup 0 -L2- 2 -L3- 3 -L4- 1
///   SLA 1: 4 -L1- 5, backup 4 -L5- 2 -L3- 3 -L6- 5
inline Scenario contention_fixture() {
    const Topology t = make_topology(6, {{0, 1}, {4, 5}, {0, 2}, {2, 3}, {1, 3}, {2, 4}, {3, 5}});
    return make_scenario(t, {{0, 1, 4.0, {0}, {2, 3, 4}}, {4, 5, 5.0, {1}, {5, 3, 6}}});
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("risknet_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing
