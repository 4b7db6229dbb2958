#include "promptga/config.hpp"
#include "promptga/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace promptga;
using promptga::testing::TempDir;
using nlohmann::json;

TEST(RunConfig, DefaultsFollowTheReferenceSetup) {
  const auto c = run_config_from_json(json::parse(R"({"catalog": "k.tsv", "descriptions": "d.tsv"})"));
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.cardinality_cap, 15u);
  EXPECT_DOUBLE_EQ(c.mutation_probability, 0.01);
  EXPECT_EQ(c.iterations, 56);
  EXPECT_EQ(c.mode, RunMode::simulate);
  EXPECT_EQ(c.quality.mode, QualityMode::one_mistake);
  EXPECT_DOUBLE_EQ(c.quality.accuracy_floor, 0.8);
  EXPECT_DOUBLE_EQ(c.quality.min_page_seconds, 15.0);
  EXPECT_EQ(c.page_size, 5u);
  EXPECT_EQ(c.pages_per_golden, 5u);
  EXPECT_EQ(c.assignments_per_task, 1);
  EXPECT_EQ(c.max_attempts, 64);
  EXPECT_DOUBLE_EQ(c.bt.epsilon, 0.1);
  EXPECT_FALSE(c.init_top_k.has_value());
}

TEST(RunConfig, RelativePathsResolveAgainstTheConfigDirectory) {
  const auto c = run_config_from_json(
      json::parse(R"({"catalog": "k.tsv", "descriptions": "/abs/d.tsv", "utility_model": "m.json"})"), "/base");
  EXPECT_EQ(c.catalog_path, std::filesystem::path("/base/k.tsv"));
  EXPECT_EQ(c.descriptions_path, std::filesystem::path("/abs/d.tsv"));
  EXPECT_EQ(c.utility_model_path, std::filesystem::path("/base/m.json"));
  EXPECT_EQ(c.asset_dir, std::filesystem::path("/base/assets"));
}

TEST(RunConfig, RoundTripsThroughDisk) {
  TempDir dir;
  RunConfig c;
  c.catalog_path = dir / "k.tsv";
  c.descriptions_path = dir / "d.tsv";
  c.asset_dir = dir / "assets";
  c.k = 2;
  c.cardinality_cap = 4;
  c.iterations = 9;
  c.mode = RunMode::serve;
  c.quality.mode = QualityMode::threshold;
  c.quality.min_goldens = 7;
  c.seed = 1234567890123ULL;
  c.init_top_k = 3;
  c.generator_command = "gen --fast";
  c.sim.workers = 3;
  c.sim.honest_seconds_min = 5;
  c.sim.honest_seconds_max = 6;
  c.bt.epsilon = 0.0;
  save_run_config(c, dir / "run.json");
  const auto back = load_run_config(dir / "run.json");
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(RunConfig, InvalidValuesAreRejected) {
  const auto with = [](const char* extra) {
    auto j = json::parse(R"({"catalog": "k.tsv", "descriptions": "d.tsv"})");
    j.update(json::parse(extra));
    return run_config_from_json(j);
  };
  EXPECT_THROW(with(R"({"k": 0})"), ConfigError);
  EXPECT_THROW(with(R"({"mutation_probability": 1.5})"), ConfigError);
  EXPECT_THROW(with(R"({"iterations": -1})"), ConfigError);
  EXPECT_THROW(with(R"({"mode": "batch"})"), ConfigError);
  EXPECT_THROW(with(R"({"quality": {"mode": "strict"}})"), ConfigError);
  EXPECT_THROW(with(R"({"quality": {"accuracy_floor": 1.2}})"), ConfigError);
  EXPECT_THROW(with(R"({"assignments_per_task": 0})"), ConfigError);
  EXPECT_THROW(with(R"({"k": "three"})"), ConfigError);
  EXPECT_NO_THROW(with(R"({"iterations": 0})"));
  EXPECT_THROW(run_config_from_json(json::parse(R"({"descriptions": "d.tsv"})")), ConfigError);
}

TEST(RunConfig, MissingOrBrokenFile) {
  TempDir dir;
  EXPECT_THROW(load_run_config(dir / "absent.json"), ConfigError);
  promptga::testing::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(load_run_config(dir / "bad.json"), ConfigError);
}

TEST(RunConfig, BundledConfigsLoad) {
  const std::filesystem::path data = PROMPTGA_DATA_DIR;
  const auto full = load_run_config(data / "run.json");
  EXPECT_EQ(full.mode, RunMode::serve);
  EXPECT_EQ(full.iterations, 56);
  const auto sim = load_run_config(data / "sim" / "run.json");
  EXPECT_EQ(sim.cardinality_cap, 4u);
  EXPECT_TRUE(std::filesystem::exists(sim.utility_model_path));
}
