#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "magzoll/geometry.hpp"

namespace magzoll {

using Json = nlohmann::ordered_json;

/// Complete schema with default values. A null default marks an optional
/// number; every other key fixes the accepted JSON type.
const Json& default_config();

/// Resolved experiment configuration: defaults, then the config file, then
/// `--set key=value` overrides (dotted keys). Unknown keys and type
/// mismatches raise ConfigError naming the key.
struct ExperimentConfig {
  Json data;

  static ExperimentConfig resolve(const std::string& config_text, const std::vector<std::string>& overrides,
                                  const std::string& source = "config");
  static ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides);

  const Json& at(const std::string& dotted) const;
  double number(const std::string& dotted) const;
  std::optional<double> optional_number(const std::string& dotted) const;
  int integer(const std::string& dotted) const;
};

/// Surface from its JSON description (`kind`, `lattice`, `radius`, `profile`, `f`, `orientation`, `pole_margin`).
MagneticSurface surface_from_json(const Json& j);

}  // namespace magzoll
