#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "risknet/provisioning.hpp"
#include "risknet/topology.hpp"

namespace risknet::detail {

nlohmann::json parse_json(const std::string& text);

/// Throws ParseError if a required key is missing or an unknown key is present.
void require_keys(const nlohmann::json& j, const std::string& context,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {});

double get_number(const nlohmann::json& j, const char* key, const std::string& context);
long long get_integer(const nlohmann::json& j, const char* key, const std::string& context);

nlohmann::json topology_to_json(const Topology& topology);
Topology topology_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace risknet::detail
