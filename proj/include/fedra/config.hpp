#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fedra/experiment.hpp"

namespace fedra {

// Strict: unknown keys and wrong types throw ConfigError naming the key; the
// result is validated.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Every field, defaults included. parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace fedra
