#pragma once

#include "promptga/genome.hpp"
#include "promptga/mask.hpp"
#include "promptga/random.hpp"
#include "promptga/scheduler.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace promptga {

/// Synthetic ground truth standing in for image generation: a set's appeal is
/// additive in its keywords plus sparse pairwise interactions.
struct UtilityModel {
  Eigen::VectorXd keyword_weights;
  /// Keys are (i, j) with i < j.
  std::map<std::pair<std::size_t, std::size_t>, double> interaction_terms;
  std::map<std::int64_t, double> description_offsets;
  double distractor_penalty = 3.0;
  double asset_noise_sigma = 0.25;

  std::size_t size() const noexcept { return static_cast<std::size_t>(keyword_weights.size()); }
  /// Throws ConfigError on non-finite weights or a non-positive penalty.
  void validate() const;
};

inline constexpr std::uint64_t kDefaultModelSeed = 20221006;

/// Weights ~ Normal(weight_mean, weight_sd), no interactions, zero offsets,
/// sigma 0.25, penalty 3.
UtilityModel default_synthetic_model(std::size_t keyword_count, std::uint64_t seed = kDefaultModelSeed,
                                     double weight_mean = 0.0, double weight_sd = 1.0);

nlohmann::json to_json(const UtilityModel& model);
UtilityModel utility_model_from_json(const nlohmann::json& j);
UtilityModel load_utility_model(const std::filesystem::path& path);
void save_utility_model(const UtilityModel& model, const std::filesystem::path& path);

/// Selected weights + active interactions + description offset.
double true_utility(const KeywordMask& mask, std::int64_t description_id, const UtilityModel& model);

/// Mean true utility over several descriptions.
double mean_true_utility(const KeywordMask& mask, std::span<const std::int64_t> description_ids,
                         const UtilityModel& model);

inline constexpr std::size_t kAssetsPerSet = 4;

struct RenderedSet {
  std::int64_t description_id = 0;
  CandidateId set_id = 0;  // negative ids are distractors
  std::array<double, kAssetsPerSet> utilities{};

  double mean_utility() const noexcept;
};

/// Four asset utilities ~ true_utility + Normal(0, sigma); distractor ids are
/// shifted down by the distractor penalty.
RenderedSet render(std::int64_t description_id, CandidateId set_id, const KeywordMask& mask,
                   const UtilityModel& model, Rng& rng);

struct SimWorker {
  std::string worker_id;
  double beta = 5.0;
  bool spammer = false;
};

/// Spammers pick uniformly. Otherwise left wins with probability
/// logistic(beta * (mean(left) - mean(right))).
Side sim_judge(const SimWorker& worker, const RenderedSet& left, const RenderedSet& right, Rng& rng);

/// Probability that an honest worker picks left.
double left_preference(double beta, double left_mean, double right_mean);

struct BruteForceResult {
  KeywordMask mask;
  double utility = 0;
  std::uint64_t enumerated = 0;
};

inline constexpr std::uint64_t kBruteForceGuard = 1'000'000;

/// Number of masks of length K with popcount <= cap.
std::uint64_t feasible_mask_count(std::size_t keyword_count, std::size_t cap);

/// Exhaustive maximiser of mean true utility over masks with popcount <= cap;
/// ties go to the lexicographically smallest mask. Throws CapacityError when
/// more than kBruteForceGuard masks would be enumerated.
BruteForceResult brute_force_best(const UtilityModel& model, std::span<const std::int64_t> description_ids,
                                  std::size_t keyword_count, std::size_t cap);

}  // namespace promptga
