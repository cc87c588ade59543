#include "risknet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "json_util.hpp"
#include "risknet/error.hpp"
#include "risknet/rng.hpp"

namespace risknet {

Topology::Topology(int n_routers, std::vector<Link> links, std::vector<Point> positions)
    : n_routers_(n_routers), links_(std::move(links)), positions_(std::move(positions)) {
    if (n_routers_ < 1) throw ParameterError("topology needs at least one router");
    if (!positions_.empty() && static_cast<int>(positions_.size()) != n_routers_)
        throw ParameterError("positions must have one entry per router");
    for (const Point& p : positions_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ParameterError("non-finite router position");

    adjacency_.assign(static_cast<std::size_t>(n_routers_), {});
    std::set<std::pair<RouterId, RouterId>> seen;
    for (std::size_t i = 0; i < links_.size(); ++i) {
        Link& l = links_[i];
        if (l.id != static_cast<LinkId>(i))
            throw ParameterError("link ids must be dense and ordered, got " + std::to_string(l.id) +
                                 " at position " + std::to_string(i));
        if (l.a > l.b) std::swap(l.a, l.b);
        if (l.a < 0 || l.b >= n_routers_)
            throw ParameterError("link " + std::to_string(l.id) + " references unknown router");
        if (l.a == l.b) throw ParameterError("self-loop on link " + std::to_string(l.id));
        if (!(l.length_km > 0.0) || !std::isfinite(l.length_km))
            throw ParameterError("link " + std::to_string(l.id) + " must have positive length");
        if (!(l.backup_capacity >= 0.0) || !std::isfinite(l.backup_capacity))
            throw ParameterError("link " + std::to_string(l.id) + " has negative backup capacity");
        if (!seen.emplace(l.a, l.b).second)
            throw ParameterError("duplicate link between routers " + std::to_string(l.a) + " and " +
                                 std::to_string(l.b));
        adjacency_[static_cast<std::size_t>(l.a)].push_back({l.b, l.id});
        adjacency_[static_cast<std::size_t>(l.b)].push_back({l.a, l.id});
    }
    for (auto& adj : adjacency_)
        std::sort(adj.begin(), adj.end(), [](const Adjacent& x, const Adjacent& y) {
            return std::pair(x.neighbor, x.link) < std::pair(y.neighbor, y.link);
        });

    std::vector<char> visited(static_cast<std::size_t>(n_routers_), 0);
    std::vector<RouterId> stack{0};
    visited[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        RouterId r = stack.back();
        stack.pop_back();
        for (const Adjacent& adj : adjacency_[static_cast<std::size_t>(r)]) {
            if (!visited[static_cast<std::size_t>(adj.neighbor)]) {
                visited[static_cast<std::size_t>(adj.neighbor)] = 1;
                ++reached;
                stack.push_back(adj.neighbor);
            }
        }
    }
    if (reached != n_routers_) throw ParameterError("topology is not connected");
}

std::span<const Adjacent> Topology::adjacency(RouterId r) const {
    return adjacency_.at(static_cast<std::size_t>(r));
}

LinkId Topology::find_link(RouterId u, RouterId v) const {
    for (const Adjacent& adj : adjacency(u))
        if (adj.neighbor == v) return adj.link;
    return -1;
}

Topology Topology::with_backup_capacities(const std::vector<double>& capacities) const {
    if (static_cast<int>(capacities.size()) != n_links())
        throw ParameterError("capacity vector size mismatch");
    std::vector<Link> links = links_;
    for (std::size_t i = 0; i < links.size(); ++i) links[i].backup_capacity = capacities[i];
    return Topology(n_routers_, std::move(links), positions_);
}

Topology generate_ba(int n_routers, int m, std::uint64_t seed) {
    if (m < 2) throw ParameterError("BA attachment count m must be >= 2");
    if (n_routers < m + 1) throw ParameterError("BA graph needs at least m+1 routers");

    Rng rng(seed);
    std::vector<Link> links;
    // Every link contributes both endpoints, so a uniform draw from this list is
    // a draw proportional to degree.
    std::vector<RouterId> endpoints;
    auto add = [&](RouterId a, RouterId b) {
        links.push_back({static_cast<LinkId>(links.size()), std::min(a, b), std::max(a, b), 1.0, 0.0});
        endpoints.push_back(a);
        endpoints.push_back(b);
    };
    for (RouterId a = 0; a <= m; ++a)
        for (RouterId b = a + 1; b <= m; ++b) add(a, b);

    for (RouterId v = m + 1; v < n_routers; ++v) {
        std::vector<RouterId> targets;
        while (static_cast<int>(targets.size()) < m) {
            RouterId t = endpoints[rng.index(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (RouterId t : targets) add(t, v);
    }
    return Topology(n_routers, std::move(links));
}

std::vector<Point> spring_layout(const Topology& topology, int iterations, double scale,
                                 std::uint64_t seed) {
    if (iterations < 0) throw ParameterError("iterations must be non-negative");
    if (!(scale > 0.0)) throw ParameterError("layout scale must be positive");
    const auto n = static_cast<std::size_t>(topology.n_routers());
    Rng rng(seed);
    std::vector<Point> pos(n);
    for (Point& p : pos) {
        p.x = rng.uniform01();
        p.y = rng.uniform01();
    }
    const double k = std::sqrt(1.0 / static_cast<double>(n));
    double temperature = 0.1;
    const double cooling = iterations > 0 ? temperature / (iterations + 1) : 0.0;
    std::vector<Point> disp(n);

    for (int it = 0; it < iterations; ++it) {
        std::fill(disp.begin(), disp.end(), Point{});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i].x - pos[j].x;
                double dy = pos[i].y - pos[j].y;
                double d = std::hypot(dx, dy);
                if (d < 1e-9) {
                    // Coincident routers: push apart along a fixed direction.
                    dx = 1e-9;
                    dy = 0.0;
                    d = 1e-9;
                }
                const double f = k * k / d;
                disp[i].x += dx / d * f;
                disp[i].y += dy / d * f;
                disp[j].x -= dx / d * f;
                disp[j].y -= dy / d * f;
            }
        }
        for (const Link& l : topology.links()) {
            auto a = static_cast<std::size_t>(l.a), b = static_cast<std::size_t>(l.b);
            const double dx = pos[a].x - pos[b].x;
            const double dy = pos[a].y - pos[b].y;
            const double d = std::hypot(dx, dy);
            if (d < 1e-12) continue;
            const double f = d * d / k;
            disp[a].x -= dx / d * f;
            disp[a].y -= dy / d * f;
            disp[b].x += dx / d * f;
            disp[b].y += dy / d * f;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double len = std::hypot(disp[i].x, disp[i].y);
            if (len < 1e-12) continue;
            const double step = std::min(len, temperature);
            pos[i].x += disp[i].x / len * step;
            pos[i].y += disp[i].y / len * step;
        }
        temperature -= cooling;
    }

    double min_x = pos[0].x, max_x = pos[0].x, min_y = pos[0].y, max_y = pos[0].y;
    for (const Point& p : pos) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double diag = std::hypot(max_x - min_x, max_y - min_y);
    const double factor = diag > 0.0 ? scale / diag : 0.0;
    for (Point& p : pos) {
        p.x = (p.x - min_x) * factor;
        p.y = (p.y - min_y) * factor;
    }
    return pos;
}

Topology assign_link_lengths(const Topology& topology, const std::vector<Point>& positions) {
    if (static_cast<int>(positions.size()) != topology.n_routers())
        throw ParameterError("positions do not cover every router");
    std::vector<Link> links = topology.links();
    for (Link& l : links) {
        const Point& p = positions[static_cast<std::size_t>(l.a)];
        const Point& q = positions[static_cast<std::size_t>(l.b)];
        l.length_km = std::max(kMinLinkLengthKm, std::hypot(p.x - q.x, p.y - q.y));
    }
    return Topology(topology.n_routers(), std::move(links), positions);
}

std::string serialize_topology(const Topology& topology) {
    return detail::topology_to_json(topology).dump();
}

Topology deserialize_topology(const std::string& json_text) {
    nlohmann::json j = detail::parse_json(json_text);
    detail::require_keys(j, "topology", {"routers", "links"}, {"positions"});
    return detail::topology_from_json(j);
}

}  // namespace risknet
