#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace risknet {

using RouterId = int;
using LinkId = int;

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

struct Link {
    LinkId id = 0;
    RouterId a = 0;  // a < b
    RouterId b = 0;
    double length_km = 1.0;
    double backup_capacity = 0.0;
    bool operator==(const Link&) const = default;

    RouterId other(RouterId r) const { return r == a ? b : a; }
};

struct Adjacent {
    RouterId neighbor;
    LinkId link;
};

/// Undirected, simple, connected physical network. Link ids are dense and
/// equal to their position in links(). Immutable once constructed.
class Topology {
public:
    Topology() = default;
    /// Validates every invariant; throws ParameterError on violation.
    /// Endpoints are normalized so that a < b.
    Topology(int n_routers, std::vector<Link> links, std::vector<Point> positions = {});

    int n_routers() const { return n_routers_; }
    int n_links() const { return static_cast<int>(links_.size()); }
    const std::vector<Link>& links() const { return links_; }
    const Link& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
    /// Neighbors sorted by (neighbor id, link id).
    std::span<const Adjacent> adjacency(RouterId r) const;
    const std::vector<Point>& positions() const { return positions_; }
    int degree(RouterId r) const { return static_cast<int>(adjacency(r).size()); }
    /// Link joining two routers, or -1.
    LinkId find_link(RouterId u, RouterId v) const;

    Topology with_backup_capacities(const std::vector<double>& capacities) const;

    bool operator==(const Topology& other) const {
        return n_routers_ == other.n_routers_ && links_ == other.links_ &&
               positions_ == other.positions_;
    }

private:
    int n_routers_ = 0;
    std::vector<Link> links_;
    std::vector<Point> positions_;
    std::vector<std::vector<Adjacent>> adjacency_;
};

/// Barabasi-Albert graph: a complete seed graph on m+1 routers, then every new
/// router attaches to m distinct existing routers with probability
/// proportional to their current degree. Link lengths are set to 1 km.
Topology generate_ba(int n_routers, int m, std::uint64_t seed);

/// Fruchterman-Reingold layout from seeded random initial positions, rescaled
/// so that the bounding-box diagonal equals `scale`.
std::vector<Point> spring_layout(const Topology& topology, int iterations, double scale,
                                 std::uint64_t seed);

/// Link length = Euclidean distance of its endpoints, floored at 1 km. The
/// returned topology also carries the positions.
Topology assign_link_lengths(const Topology& topology, const std::vector<Point>& positions);

inline constexpr double kMinLinkLengthKm = 1.0;

std::string serialize_topology(const Topology& topology);
Topology deserialize_topology(const std::string& json_text);

}  // namespace risknet
