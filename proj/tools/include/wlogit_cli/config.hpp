#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wlogit/simbench.hpp"

namespace wlogit::cli {

/// Parses a simulation config: one [[scenario]] table per scenario with
/// optional [scenario.wlogit] and [scenario.lasso] sub-tables. Unknown keys
/// are rejected. Throws DataError with the offending key.
std::vector<ScenarioConfig> parse_simulation_config(const std::string& toml_text,
                                                    const std::string& source = "config");
std::vector<ScenarioConfig> load_simulation_config(const std::filesystem::path& path);

}  // namespace wlogit::cli
