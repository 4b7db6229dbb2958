#pragma once

#include "promptga/quality.hpp"
#include "promptga/ranking.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace promptga {

enum class RunMode { simulate, serve };

std::string_view to_string(RunMode m) noexcept;
RunMode parse_run_mode(std::string_view s);

/// Synthetic crowd used in simulate mode.
struct SimulationConfig {
  int workers = 8;
  double spammer_fraction = 0.0;
  double beta = 5.0;
  /// Seconds an honest worker spends per comparison, uniform in [min, max].
  double honest_seconds_min = 4.0;
  double honest_seconds_max = 12.0;
  double spammer_seconds_min = 1.0;
  double spammer_seconds_max = 4.0;
};

struct RunConfig {
  std::filesystem::path catalog_path;
  std::filesystem::path descriptions_path;
  int k = 3;
  std::size_t cardinality_cap = 15;
  double mutation_probability = 0.01;
  int iterations = 56;
  RunMode mode = RunMode::simulate;
  QualityPolicy quality;
  std::filesystem::path utility_model_path;  // simulate mode; empty = default synthetic model
  std::string generator_command;             // serve mode; empty = placeholder assets
  std::string distractor_command;            // serve mode; empty = generator on the bare description
  std::filesystem::path asset_dir = "assets";
  std::filesystem::path static_dir;          // annotation UI bundle served at /
  std::uint64_t seed = 0;

  /// Size of the popular-keyword initial mask; defaults to the cap.
  std::optional<std::size_t> init_top_k;
  std::size_t page_size = 5;
  std::size_t pages_per_golden = 5;
  int assignments_per_task = 1;
  int max_attempts = 64;
  BtOptions bt;
  SimulationConfig sim;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Relative paths are resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace promptga
