#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "grove/scenario.hpp"

namespace grove {

/// Parses a scenario config. A file carrying a `users` block is a fully materialized
/// scenario (as written by save_scenario); otherwise the fields are generation
/// parameters and the instance is generated. Throws ConfigError naming the field.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text);
ScenarioConfig config_from_json_text(const std::string& text);

/// Writes the materialized scenario; load_scenario(save_scenario(s)) reproduces s.
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
std::string scenario_to_json_text(const Scenario& scenario);
std::string config_to_json_text(const ScenarioConfig& config);

/// FNV-1a over the canonical JSON text.
std::uint64_t scenario_hash(const Scenario& scenario);

}  // namespace grove
