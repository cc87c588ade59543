#pragma once

#include <string>

#include "risknet/provisioning.hpp"

namespace risknet {

/// Scenario JSON: the topology document extended with "slas", "reliability",
/// and optional "penalty_rate" / "meta" blocks. Unknown keys are rejected.
std::string serialize_scenario(const Scenario& scenario);
Scenario deserialize_scenario(const std::string& json_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace risknet
