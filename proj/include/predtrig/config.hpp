#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "predtrig/system_model.hpp"
#include "predtrig/triggering.hpp"

namespace predtrig {

// Scenario files are flat key/value documents:
//
//   # Example 1 with a predictive trigger
//   model.preset = example1
//   [trigger]
//   kind = pt
//   M = 2
//   cost = "0.6"
//
// A "[section]" line prefixes the following keys with "section.". Matrices
// are whitespace-separated row-major entries; shapes come from model.nx and
// model.ny. A preset fills the model and prior blocks; explicit keys override
// it regardless of their position in the file.

struct ModelBlock {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> A, H, Q, R;
};

struct PriorBlock {
  std::vector<double> mean;
  std::vector<double> cov;
};

struct TriggerBlock {
  std::optional<TriggerKind> kind;
  std::optional<std::size_t> horizon;
  std::size_t max_horizon = 10000;
  std::optional<double> cost;
  std::optional<std::filesystem::path> cost_table;
};

struct SimBlock {
  std::size_t steps = 200;
  std::size_t runs = 2000;
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  std::optional<std::string> preset;
  ModelBlock model;
  PriorBlock prior;
  TriggerBlock trigger;
  SimBlock sim;

  /// Dimension and value checks; throws ConfigError.
  void validate() const;

  ModelProvider build_model() const;
  Prior build_prior() const;
  /// Requires trigger.kind and a cost (constant or table). Relative table
  /// paths resolve against `base_dir`.
  TriggerSpec build_trigger(const std::filesystem::path& base_dir = {}) const;
  CostSchedule build_cost(const std::filesystem::path& base_dir = {}) const;
};

/// "example1" (A = 0.98) or "example2" (A = 1.1); H = 1, Q = R = 0.1,
/// x0_mean = X0 = 1 for both. Throws ConfigError for unknown names.
void apply_preset(ScenarioConfig& config, const std::string& name);

ScenarioConfig preset_config(const std::string& name);

/// Parses a scenario document; errors carry the offending line number.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Whitespace/comma separated costs C_1, C_2, ...
std::vector<double> parse_cost_list(std::string_view text);
std::vector<double> load_cost_table(const std::filesystem::path& path);

}  // namespace predtrig
