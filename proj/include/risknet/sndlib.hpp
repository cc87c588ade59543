#pragma once

#include <string>
#include <vector>

#include "risknet/topology.hpp"

namespace risknet {

struct SndlibNetwork {
    Topology topology;
    std::vector<std::string> node_names;  // indexed by RouterId
    std::vector<std::string> link_names;  // indexed by LinkId
};

/// Reads the NODES and LINKS sections of an SNDlib native-format document.
/// Router ids follow the order of appearance. Link lengths come from node
/// coordinates: great-circle distance when every coordinate is a plausible
/// (longitude, latitude) pair, Euclidean otherwise; floored at 1 km.
/// Other sections are skipped. Throws ParseError naming the line on failure.
SndlibNetwork import_sndlib(const std::string& text);

double great_circle_km(double lon1, double lat1, double lon2, double lat2);

}  // namespace risknet
