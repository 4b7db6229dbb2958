#include "promptga/config.hpp"

#include "promptga/errors.hpp"

#include <fstream>

namespace promptga {

std::string_view to_string(RunMode m) noexcept { return m == RunMode::simulate ? "simulate" : "serve"; }

RunMode parse_run_mode(std::string_view s) {
  if (s == "simulate") return RunMode::simulate;
  if (s == "serve") return RunMode::serve;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
    throw ConfigError("mutation_probability must lie in [0, 1]");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (page_size < 1) throw ConfigError("page_size must be >= 1");
  if (pages_per_golden < 1) throw ConfigError("pages_per_golden must be >= 1");
  if (assignments_per_task < 1) throw ConfigError("assignments_per_task must be >= 1");
  if (max_attempts < 0) throw ConfigError("max_attempts must be >= 0");
  if (bt.epsilon < 0 || !(bt.tol > 0) || bt.max_iter < 1) throw ConfigError("invalid Bradley-Terry options");
  if (sim.workers < 1) throw ConfigError("simulation needs at least one worker");
  if (!(sim.spammer_fraction >= 0.0 && sim.spammer_fraction < 1.0))
    throw ConfigError("spammer_fraction must lie in [0, 1)");
  if (sim.beta < 0) throw ConfigError("worker beta must be non-negative");
  if (!(sim.honest_seconds_min > 0 && sim.honest_seconds_min <= sim.honest_seconds_max) ||
      !(sim.spammer_seconds_min > 0 && sim.spammer_seconds_min <= sim.spammer_seconds_max))
    throw ConfigError("invalid simulated answer times");
  quality.validate();
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {
      {"catalog", c.catalog_path.string()},
      {"descriptions", c.descriptions_path.string()},
      {"k", c.k},
      {"cardinality_cap", c.cardinality_cap},
      {"mutation_probability", c.mutation_probability},
      {"iterations", c.iterations},
      {"mode", std::string(to_string(c.mode))},
      {"quality",
       {{"mode", std::string(to_string(c.quality.mode))},
        {"accuracy_floor", c.quality.accuracy_floor},
        {"min_goldens", c.quality.min_goldens},
        {"min_page_seconds", c.quality.min_page_seconds}}},
      {"utility_model", c.utility_model_path.string()},
      {"generator_command", c.generator_command},
      {"distractor_command", c.distractor_command},
      {"asset_dir", c.asset_dir.string()},
      {"static_dir", c.static_dir.string()},
      {"seed", c.seed},
      {"page_size", c.page_size},
      {"pages_per_golden", c.pages_per_golden},
      {"assignments_per_task", c.assignments_per_task},
      {"max_attempts", c.max_attempts},
      {"bradley_terry", {{"epsilon", c.bt.epsilon}, {"tol", c.bt.tol}, {"max_iter", c.bt.max_iter}}},
      {"simulation",
       {{"workers", c.sim.workers},
        {"spammer_fraction", c.sim.spammer_fraction},
        {"beta", c.sim.beta},
        {"honest_seconds", {c.sim.honest_seconds_min, c.sim.honest_seconds_max}},
        {"spammer_seconds", {c.sim.spammer_seconds_min, c.sim.spammer_seconds_max}}}},
  };
  if (c.init_top_k) j["init_top_k"] = *c.init_top_k;
  return j;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    c.catalog_path = resolve(base_dir, j.at("catalog").get<std::string>());
    c.descriptions_path = resolve(base_dir, j.at("descriptions").get<std::string>());
    c.k = j.value("k", c.k);
    c.cardinality_cap = j.value("cardinality_cap", c.cardinality_cap);
    c.mutation_probability = j.value("mutation_probability", c.mutation_probability);
    c.iterations = j.value("iterations", c.iterations);
    c.mode = parse_run_mode(j.value("mode", std::string("simulate")));
    if (j.contains("quality")) {
      const auto& q = j.at("quality");
      c.quality.mode = parse_quality_mode(q.value("mode", std::string("one_mistake")));
      c.quality.accuracy_floor = q.value("accuracy_floor", c.quality.accuracy_floor);
      c.quality.min_goldens = q.value("min_goldens", c.quality.min_goldens);
      c.quality.min_page_seconds = q.value("min_page_seconds", c.quality.min_page_seconds);
    }
    c.utility_model_path = resolve(base_dir, j.value("utility_model", std::string()));
    c.generator_command = j.value("generator_command", std::string());
    c.distractor_command = j.value("distractor_command", std::string());
    c.asset_dir = resolve(base_dir, j.value("asset_dir", std::string("assets")));
    c.static_dir = resolve(base_dir, j.value("static_dir", std::string()));
    c.seed = j.value("seed", c.seed);
    if (j.contains("init_top_k")) c.init_top_k = j.at("init_top_k").get<std::size_t>();
    c.page_size = j.value("page_size", c.page_size);
    c.pages_per_golden = j.value("pages_per_golden", c.pages_per_golden);
    c.assignments_per_task = j.value("assignments_per_task", c.assignments_per_task);
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    if (j.contains("bradley_terry")) {
      const auto& b = j.at("bradley_terry");
      c.bt.epsilon = b.value("epsilon", c.bt.epsilon);
      c.bt.tol = b.value("tol", c.bt.tol);
      c.bt.max_iter = b.value("max_iter", c.bt.max_iter);
    }
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      c.sim.workers = s.value("workers", c.sim.workers);
      c.sim.spammer_fraction = s.value("spammer_fraction", c.sim.spammer_fraction);
      c.sim.beta = s.value("beta", c.sim.beta);
      if (s.contains("honest_seconds")) {
        c.sim.honest_seconds_min = s.at("honest_seconds").at(0).get<double>();
        c.sim.honest_seconds_max = s.at("honest_seconds").at(1).get<double>();
      }
      if (s.contains("spammer_seconds")) {
        c.sim.spammer_seconds_min = s.at("spammer_seconds").at(0).get<double>();
        c.sim.spammer_seconds_max = s.at("spammer_seconds").at(1).get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("run config is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j, std::filesystem::absolute(path).parent_path().lexically_normal());
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run config " + path.string());
  out << to_json(config).dump(2) << '\n';
}

}  // namespace promptga
