#ifndef CDMRG_CONFIG_HPP
#define CDMRG_CONFIG_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cdmrg/harness.hpp"

namespace cdmrg {

// Parses a JSON experiment config. Unknown keys, wrong types and invalid
// values are collected and reported together in one InvalidInput.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// The resolved config, every field spelled out except output_dir.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace cdmrg

#endif  // CDMRG_CONFIG_HPP
