#include "risknet/sndlib.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "risknet/error.hpp"

namespace risknet {

namespace {

struct RawNode {
    std::string name;
    double x = 0.0;
    double y = 0.0;
};

struct RawLink {
    std::string name;
    std::string src;
    std::string dst;
    int line = 0;
};

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParseError("sndlib line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Splits on whitespace while treating '(' and ')' as separate tokens.
std::vector<std::string> tokenize(const std::string& line) {
    std::string spaced;
    for (char c : line) {
        if (c == '(' || c == ')') {
            spaced += ' ';
            spaced += c;
            spaced += ' ';
        } else {
            spaced += c;
        }
    }
    std::istringstream in(spaced);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    return tokens;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

}  // namespace

double great_circle_km(double lon1, double lat1, double lon2, double lat2) {
    constexpr double kEarthRadiusKm = 6371.0;
    const double deg = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * deg;
    const double dlon = (lon2 - lon1) * deg;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * deg) * std::cos(lat2 * deg) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

SndlibNetwork import_sndlib(const std::string& text) {
    enum class Section { None, Nodes, Links, Other };
    Section section = Section::None;
    int other_depth = 0;
    bool saw_nodes = false, saw_links = false;
    std::vector<RawNode> nodes;
    std::vector<RawLink> links;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty() || line[0] == '?') continue;
        const std::vector<std::string> tok = tokenize(line);

        if (section == Section::None) {
            if (tok.size() != 2 || tok[1] != "(") fail(line_no, "expected a section header");
            if (tok[0] == "NODES") {
                section = Section::Nodes;
                saw_nodes = true;
            } else if (tok[0] == "LINKS") {
                section = Section::Links;
                saw_links = true;
            } else {
                section = Section::Other;
                other_depth = 1;
            }
            continue;
        }
        if (section == Section::Other) {
            // Skipped sections may nest parentheses (ADMISSIBLE_PATHS).
            for (const std::string& t : tok) other_depth += (t == "(") - (t == ")");
            if (other_depth <= 0) section = Section::None;
            continue;
        }
        if (tok.size() == 1 && tok[0] == ")") {
            section = Section::None;
            continue;
        }

        if (section == Section::Nodes) {
            // NAME ( x y )
            if (tok.size() != 5 || tok[1] != "(" || tok[4] != ")") fail(line_no, "malformed node line");
            RawNode n{tok[0], 0.0, 0.0};
            if (!parse_double(tok[2], n.x) || !parse_double(tok[3], n.y))
                fail(line_no, "bad node coordinates");
            for (const RawNode& o : nodes)
                if (o.name == n.name) fail(line_no, "duplicate node " + n.name);
            nodes.push_back(n);
        } else {
            // NAME ( SRC DST ) capacity/cost fields...
            if (tok.size() < 5 || tok[1] != "(" || tok[4] != ")") fail(line_no, "malformed link line");
            links.push_back({tok[0], tok[2], tok[3], line_no});
        }
    }
    if (section != Section::None) fail(line_no, "unterminated section");
    if (!saw_nodes) throw ParseError("sndlib: missing NODES section");
    if (!saw_links) throw ParseError("sndlib: missing LINKS section");

    std::map<std::string, RouterId> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].name] = static_cast<RouterId>(i);
    const bool geographic = std::all_of(nodes.begin(), nodes.end(), [](const RawNode& n) {
        return std::abs(n.x) <= 180.0 && std::abs(n.y) <= 90.0;
    });

    SndlibNetwork net;
    std::vector<Link> topo_links;
    std::set<std::pair<RouterId, RouterId>> pairs;
    std::set<std::string> names;
    for (const RawLink& rl : links) {
        auto a = index.find(rl.src), b = index.find(rl.dst);
        if (a == index.end() || b == index.end()) fail(rl.line, "link references unknown node");
        if (a->second == b->second) fail(rl.line, "self-loop link " + rl.name);
        const auto key = std::minmax(a->second, b->second);
        if (!pairs.insert(key).second || !names.insert(rl.name).second)
            fail(rl.line, "duplicate link " + rl.name);
        const RawNode& p = nodes[static_cast<std::size_t>(a->second)];
        const RawNode& q = nodes[static_cast<std::size_t>(b->second)];
        const double d = geographic ? great_circle_km(p.x, p.y, q.x, q.y) : std::hypot(p.x - q.x, p.y - q.y);
        topo_links.push_back({static_cast<LinkId>(topo_links.size()), key.first, key.second,
                              std::max(kMinLinkLengthKm, d), 0.0});
        net.link_names.push_back(rl.name);
    }
    for (const RawNode& n : nodes) net.node_names.push_back(n.name);
    try {
        net.topology = Topology(static_cast<int>(nodes.size()), std::move(topo_links));
    } catch (const ParameterError& e) {
        throw ParseError(std::string("sndlib: ") + e.what());
    }
    return net;
}

}  // namespace risknet
