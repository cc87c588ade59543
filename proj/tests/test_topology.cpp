#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>

#include "risknet/error.hpp"
#include "risknet/rng.hpp"
#include "risknet/scenario_io.hpp"
#include "risknet/sndlib.hpp"
#include "risknet/topology.hpp"
#include "support.hpp"

using namespace risknet;

namespace {

bool connected(const Topology& t) {
    std::vector<char> seen(static_cast<std::size_t>(t.n_routers()), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int r = q.front();
        q.pop();
        for (const Adjacent& a : t.adjacency(r))
            if (!seen[static_cast<std::size_t>(a.neighbor)]) {
                seen[static_cast<std::size_t>(a.neighbor)] = 1;
                ++count;
                q.push(a.neighbor);
            }
    }
    return count == t.n_routers();
}

bool simple(const Topology& t) {
    std::set<std::pair<int, int>> pairs;
    for (const Link& l : t.links()) {
        if (l.a == l.b || l.a > l.b) return false;
        if (!pairs.insert({l.a, l.b}).second) return false;
    }
    return true;
}

std::string sndlib_doc(const std::string& nodes, const std::string& links) {
    std::string s = "?SNDlib native format; type: network; version: 1.0\n";
    if (!nodes.empty()) s += "NODES (\n" + nodes + ")\n";
    if (!links.empty()) s += "LINKS (\n" + links + ")\n";
    return s;
}

}  // namespace

TEST_CASE("rng streams are reproducible and portable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42);
    const Rng child = c.split(3);
    Rng c2(42);
    CHECK(c.next_u64() == c2.next_u64());  // split does not advance the parent
    CHECK(child.seed() == c.split(3).seed());
    CHECK(child.seed() != c.split(4).seed());
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    Rng u(7);
    for (int i = 0; i < 10000; ++i) {
        const double x = u.uniform01();
        CHECK((x >= 0.0 && x < 1.0));
        const double y = u.uniform_open_closed();
        CHECK((y > 0.0 && y <= 1.0));
        CHECK(u.index(7) < 7u);
    }
}

TEST_CASE("generate_ba edge counts") {
    const Topology tri = generate_ba(3, 2, 9);
    CHECK(tri.n_links() == 3);
    CHECK(generate_ba(10, 2, 5).n_links() == 17);
    CHECK(generate_ba(12, 3, 5).n_links() == 6 + 3 * 8);
    CHECK(generate_ba(40, 2, 1) == generate_ba(40, 2, 1));
    CHECK_FALSE(generate_ba(40, 2, 1) == generate_ba(40, 2, 2));
}

TEST_CASE("generate_ba rejects invalid sizes") {
    CHECK_THROWS_AS(generate_ba(2, 2, 1), ParameterError);
    CHECK_THROWS_AS(generate_ba(10, 1, 1), ParameterError);
}

TEST_CASE("generate_ba graphs are connected and simple") {
    for (int n = 3; n <= 100; n += 7)
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Topology t = generate_ba(n, 2, seed);
            CHECK(connected(t));
            CHECK(simple(t));
            CHECK(t.n_links() == 3 + 2 * (n - 3));
            for (int r = 0; r < n; ++r) CHECK(t.degree(r) >= 2);
        }
}

TEST_CASE("generate_ba degree distribution is right-skewed") {
    int skewed = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const Topology t = generate_ba(200, 2, static_cast<std::uint64_t>(s));
        std::vector<int> deg;
        for (int r = 0; r < t.n_routers(); ++r) deg.push_back(t.degree(r));
        std::sort(deg.begin(), deg.end());
        const double median = 0.5 * (deg[99] + deg[100]);
        skewed += deg.back() >= 3.0 * median;
    }
    CHECK(skewed >= 0.9 * seeds);
}

TEST_CASE("spring layout rescales to the requested diagonal") {
    const Topology one = testing::make_topology(2, {{0, 1}});
    const auto pos = spring_layout(one, 50, 100.0, 3);
    const double d = std::hypot(pos[0].x - pos[1].x, pos[0].y - pos[1].y);
    CHECK(d == doctest::Approx(100.0).epsilon(1e-12));

    const Topology tri = generate_ba(3, 2, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = spring_layout(tri, 50, 10.0, seed);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                const double dij = std::hypot(p[i].x - p[j].x, p[i].y - p[j].y);
                CHECK(dij > 0.0);
                CHECK(dij <= 10.0 * std::sqrt(2.0) + 1e-9);
            }
    }
    const Topology t = generate_ba(25, 2, 4);
    CHECK(spring_layout(t, 50, 3000.0, 8) == spring_layout(t, 50, 3000.0, 8));
    const auto q = spring_layout(t, 50, 3000.0, 8);
    double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
    for (const Point& p : q) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    CHECK(std::hypot(maxx - minx, maxy - miny) == doctest::Approx(3000.0).epsilon(1e-12));
}

TEST_CASE("link lengths follow positions with a floor") {
    const Topology t = testing::make_topology(3, {{0, 1}, {1, 2}, {0, 2}});
    const Topology l = assign_link_lengths(t, {{0, 0}, {3, 4}, {3, 4}});
    CHECK(l.link(0).length_km == 5.0);
    CHECK(l.link(1).length_km == kMinLinkLengthKm);
    CHECK(l.link(2).length_km == 5.0);
    CHECK(l.positions().size() == 3);
    CHECK(assign_link_lengths(l, l.positions()) == l);
    CHECK(serialize_topology(assign_link_lengths(l, l.positions())) == serialize_topology(l));
    CHECK_THROWS_AS(assign_link_lengths(t, {{0, 0}, {1, 1}}), ParameterError);
}

TEST_CASE("topology constructor enforces invariants") {
    CHECK_THROWS_AS(testing::make_topology(2, {{0, 0}}), ParameterError);
    CHECK_THROWS_AS(testing::make_topology(3, {{0, 1}, {1, 0}, {1, 2}}), ParameterError);
    CHECK_THROWS_AS(testing::make_topology(4, {{0, 1}, {2, 3}}), ParameterError);  // disconnected
    CHECK_THROWS_AS(testing::make_topology(2, {{0, 1}}, -1.0), ParameterError);
    CHECK_THROWS_AS(Topology(2, {{0, 0, 1, 1.0, -1.0}}), ParameterError);
    const Topology t(2, {{0, 1, 0, 7.0, 0.0}});
    CHECK(t.link(0).a == 0);
    CHECK(t.link(0).b == 1);
    CHECK(t.find_link(1, 0) == 0);
}

TEST_CASE("topology json round trip and strict schema") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Topology t = generate_ba(5 + static_cast<int>(seed), 2, seed);
        t = assign_link_lengths(t, spring_layout(t, 30, 1234.5, seed));
        std::vector<double> caps;
        Rng rng(seed);
        for (int i = 0; i < t.n_links(); ++i) caps.push_back(rng.uniform(0.0, 50.0));
        t = t.with_backup_capacities(caps);
        CHECK(deserialize_topology(serialize_topology(t)) == t);
    }
    const std::string ok = R"({"routers":2,"links":[{"id":0,"a":0,"b":1,"length_km":3.0,"backup_capacity":0}]})";
    CHECK(deserialize_topology(ok).n_links() == 1);
    const std::string neg = R"({"routers":2,"links":[{"id":0,"a":0,"b":1,"length_km":-3.0,"backup_capacity":0}]})";
    CHECK_THROWS_AS(deserialize_topology(neg), ParseError);
    const std::string extra =
        R"({"routers":2,"colour":1,"links":[{"id":0,"a":0,"b":1,"length_km":3.0,"backup_capacity":0}]})";
    CHECK_THROWS_AS(deserialize_topology(extra), ParseError);
    const std::string extra_link =
        R"({"routers":2,"links":[{"id":0,"a":0,"b":1,"length_km":3.0,"backup_capacity":0,"x":1}]})";
    CHECK_THROWS_AS(deserialize_topology(extra_link), ParseError);
    CHECK_THROWS_AS(deserialize_topology("{not json"), ParseError);
}

TEST_CASE("sndlib minimal document") {
    const auto net = import_sndlib(sndlib_doc("  A ( 0 0 )\n  B ( 3 4 )\n", "  L1 ( A B ) 0 0 0 0 ( 10 1 )\n"));
    CHECK(net.topology.n_routers() == 2);
    CHECK(net.topology.n_links() == 1);
    CHECK(net.topology.link(0).backup_capacity == 0.0);
    CHECK(net.node_names == std::vector<std::string>{"A", "B"});
    CHECK(net.link_names == std::vector<std::string>{"L1"});
    CHECK(net.topology.link(0).length_km == doctest::Approx(great_circle_km(0, 0, 3, 4)));
}

TEST_CASE("sndlib errors name the line") {
    CHECK_THROWS_AS(import_sndlib(sndlib_doc("  A ( 0 0 )\n  B ( 1 1 )\n", "")), ParseError);
    CHECK_THROWS_AS(import_sndlib(sndlib_doc("", "  L1 ( A B ) 0 0 0 0\n")), ParseError);
    try {
        import_sndlib(sndlib_doc("  A ( 0 0 )\n  B ( 1 1 )\n", "  L1 ( A B ) 0\n  L2 ( B A ) 0\n"));
        FAIL("duplicate link accepted");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 8") != std::string::npos);
    }
    try {
        import_sndlib(sndlib_doc("  A ( 0 0 )\n  B ( x 1 )\n", "  L1 ( A B ) 0\n"));
        FAIL("bad coordinate accepted");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(import_sndlib(sndlib_doc("  A ( 0 0 )\n  B ( 1 1 )\n", "  L1 ( A C ) 0\n")), ParseError);
    CHECK_THROWS_AS(import_sndlib("NODES (\n  A ( 0 0 )\n"), ParseError);
}

TEST_CASE("sndlib abilene file") {
    const auto net = import_sndlib(read_text_file(std::string(RISKNET_TEST_DATA) + "/abilene.txt"));
    CHECK(net.topology.n_routers() == 12);
    CHECK(net.topology.n_links() == 15);
    CHECK(net.node_names.front() == "ATLAM5");
    // Chicago to Indianapolis is roughly 265 km by great circle.
    const LinkId l = net.topology.find_link(2, 5);
    REQUIRE(l >= 0);
    CHECK(net.topology.link(l).length_km == doctest::Approx(265.0).epsilon(0.03));
    for (const Link& k : net.topology.links()) CHECK(k.length_km >= kMinLinkLengthKm);
}

TEST_CASE("great circle distance") {
    CHECK(great_circle_km(0, 0, 0, 0) == 0.0);
    CHECK(great_circle_km(0, 0, 180, 0) == doctest::Approx(std::numbers::pi * 6371.0));
    CHECK(great_circle_km(0, 0, 0, 1) == doctest::Approx(111.19).epsilon(1e-3));
}
