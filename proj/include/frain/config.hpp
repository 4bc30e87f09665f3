#pragma once

// Experiment configuration: a flat JSON object with kebab-case keys, every
// key optional and defaulted. Ablation presets expand a base config into the
// matrix of runs they compare.

#include "frain/sim.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace frain {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  SimConfig sim;
  std::size_t repeat = 10;
  std::string output_dir = "out";
  std::string preset;  // ablation preset name, empty for a plain run

  void validate() const;
};

/// Every key with its effective value.
nlohmann::json to_json(const ExperimentConfig& config);

/// Unknown keys and ill-typed values raise ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one "key=value" override; the value is typed by the key.
void apply_override(ExperimentConfig& config, const std::string& assignment);

std::vector<std::string> config_keys();

inline const std::vector<std::string> kPresets = {"fastsync", "slerp_vs_lerp", "staleness", "byzantine"};

/// Labelled run configurations for a preset, derived from base.
std::vector<SimConfig> ablation_matrix(const std::string& preset, const SimConfig& base);

}  // namespace frain
