#pragma once

#include "promptga/config.hpp"
#include "promptga/simulator.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace promptga::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("promptga-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A small simulate-mode run: `keywords` keywords named kw00.., `train` train
/// and `validation` validation descriptions, default synthetic model.
inline RunConfig small_run(const TempDir& dir, std::size_t keywords = 8, int train = 3, int validation = 1,
                           std::uint64_t seed = 11) {
  std::string catalog;
  for (std::size_t i = 0; i < keywords; ++i) {
    catalog += "kw" + std::string(i < 10 ? "0" : "") + std::to_string(i) + "\t" + std::to_string(1000 - i) + "\n";
  }
  write_file(dir / "keywords.tsv", catalog);
  std::string descriptions;
  for (int i = 0; i < train; ++i) descriptions += "train scene " + std::to_string(i) + "\tother\tsquare\ttrain\n";
  for (int i = 0; i < validation; ++i)
    descriptions += "held out scene " + std::to_string(i) + "\tanimals\tportrait\tvalidation\n";
  write_file(dir / "descriptions.tsv", descriptions);
  save_utility_model(default_synthetic_model(keywords, 5, 0.5, 1.0), dir / "model.json");

  RunConfig c;
  c.catalog_path = dir / "keywords.tsv";
  c.descriptions_path = dir / "descriptions.tsv";
  c.utility_model_path = dir / "model.json";
  c.asset_dir = dir / "assets";
  c.cardinality_cap = 3;
  c.mutation_probability = 1.0 / static_cast<double>(keywords);
  c.iterations = 4;
  c.seed = seed;
  c.sim.workers = 4;
  return c;
}

}  // namespace promptga::testing
