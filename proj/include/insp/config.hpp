#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "insp/mission.hpp"
#include "insp/planner.hpp"
#include "insp/turbine.hpp"
#include "insp/uwb.hpp"

namespace insp {

/// Invalid configuration or usage; mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One parsed value from the sectioned key = value mission file
/// (TOML-compatible subset: numbers, booleans, quoted strings and flat
/// numeric arrays).
struct ConfigValue {
  enum class Kind { number, boolean, text, array };
  Kind kind = Kind::number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<double> array;
  std::string raw;  // canonical source text, used for hashing
  std::size_t line = 0;
};

struct ConfigFile {
  using Section = std::vector<std::pair<std::string, ConfigValue>>;
  std::vector<std::pair<std::string, Section>> sections;  // file order

  const Section* section(const std::string& name) const;
  const ConfigValue* find(const std::string& section, const std::string& key) const;
};

ConfigFile parse_config_file(const std::string& path);

/// FNV-1a hash of the canonical (sorted) serialization, hex-encoded.
std::string config_hash(const ConfigFile& file);

/// Fully validated mission configuration. Unknown sections or keys are
/// rejected at load time; no side effects happen before validation passes.
struct MissionConfig {
  std::string name;
  std::string source_path;
  std::string hash;

  bool turbine_source = true;
  std::string cloud_path;
  TurbineSpec turbine;

  PlannerParams planner;
  AnchorSet anchors;
  SimSetup sim;
  double coverage_frame_rate = 5.0;
  std::string output_dir = "out";
};

MissionConfig load_mission_config(const std::string& path,
                                  std::optional<std::uint64_t> seed_override = std::nullopt,
                                  std::optional<std::string> out_override = std::nullopt);

}  // namespace insp
