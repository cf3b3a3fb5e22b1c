#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sermt/adversary/attack_spec.hpp"
#include "sermt/protocol/network.hpp"
#include "sermt/sim/energy.hpp"
#include "sermt/sim/radio.hpp"

namespace sermt::metrics {

/// Bad or inconsistent scenario input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while a valid scenario runs (CLI exit code 3).
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepPlan {
  std::vector<int> malicious{5, 10, 15, 20, 25, 30, 35};
  std::vector<double> interval{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::filesystem::path topology;
  std::optional<double> radius;  // falls back to the topology file's RADIUS line
  double box_margin = 100.0;
  int n_nodes = 60;
  int es_nodes = 30;
  double duration = 600.0;
  std::optional<std::uint64_t> seed;  // mandatory by validation time
  sim::RadioConfig radio;
  sim::EnergyModel energy;
  protocol::ProtocolConfig protocol;
  std::vector<adversary::AttackSpec> attacks;
  SweepPlan sweep;
};

/// `key = value` lines under `[section]` headers; `#` and `;` start
/// comments. `[attack]` may repeat, one section per attack. Relative
/// paths resolve against `base_dir`.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
/// Reads the file and applies the SERMT_SEED environment override.
ScenarioConfig load_config(const std::filesystem::path& path);
void validate(const ScenarioConfig& config);

}  // namespace sermt::metrics
