#pragma once

#include <json.hpp>
#include <string>

#include "pvariv/montecarlo.hpp"

namespace pvariv {

/// Parses a practical TOML subset — `key = value` pairs, `[section]`
/// headers, #-comments, strings, booleans, numbers and (nested) arrays —
/// into a JSON document. Arrays may span multiple lines.
nlohmann::json parse_toml_text(const std::string& text);

McConfig mc_config_from_json(const nlohmann::json& j);
nlohmann::json mc_config_to_json(const McConfig& cfg);

/// Reads a Monte Carlo config from a .json or .toml file.
McConfig load_mc_config(const std::string& path);

}  // namespace pvariv
