#include "promptga/simulator.hpp"

#include "promptga/errors.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace promptga {

void UtilityModel::validate() const {
  if (!keyword_weights.allFinite()) throw ConfigError("utility model has non-finite keyword weights");
  for (const auto& [key, value] : interaction_terms) {
    if (key.first >= key.second || key.second >= size())
      throw ConfigError("interaction term indices must satisfy i < j < K");
    if (!std::isfinite(value)) throw ConfigError("non-finite interaction term");
  }
  for (const auto& [id, value] : description_offsets)
    if (!std::isfinite(value)) throw ConfigError("non-finite description offset");
  if (!(distractor_penalty > 0.0)) throw ConfigError("distractor penalty must be positive");
  if (!(asset_noise_sigma >= 0.0)) throw ConfigError("asset noise sigma must be non-negative");
}

UtilityModel default_synthetic_model(std::size_t keyword_count, std::uint64_t seed, double weight_mean,
                                     double weight_sd) {
  Rng rng(seed);
  std::normal_distribution<double> normal(weight_mean, weight_sd);
  UtilityModel model;
  model.keyword_weights.resize(static_cast<Eigen::Index>(keyword_count));
  for (Eigen::Index i = 0; i < model.keyword_weights.size(); ++i) model.keyword_weights(i) = normal(rng);
  return model;
}

nlohmann::json to_json(const UtilityModel& model) {
  nlohmann::json weights = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.keyword_weights.size(); ++i) weights.push_back(model.keyword_weights(i));
  nlohmann::json interactions = nlohmann::json::array();
  for (const auto& [key, value] : model.interaction_terms)
    interactions.push_back({{"i", key.first}, {"j", key.second}, {"value", value}});
  nlohmann::json offsets = nlohmann::json::object();
  for (const auto& [id, value] : model.description_offsets) offsets[std::to_string(id)] = value;
  return {{"weights", weights},
          {"interactions", interactions},
          {"offsets", offsets},
          {"sigma", model.asset_noise_sigma},
          {"delta", model.distractor_penalty}};
}

UtilityModel utility_model_from_json(const nlohmann::json& j) {
  UtilityModel model;
  try {
    const auto weights = j.at("weights").get<std::vector<double>>();
    model.keyword_weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    if (j.contains("interactions")) {
      for (const auto& t : j.at("interactions")) {
        auto a = t.at("i").get<std::size_t>();
        auto b = t.at("j").get<std::size_t>();
        if (a > b) std::swap(a, b);
        model.interaction_terms[{a, b}] += t.at("value").get<double>();
      }
    }
    if (j.contains("offsets"))
      for (const auto& [key, value] : j.at("offsets").items())
        model.description_offsets[std::stoll(key)] = value.get<double>();
    model.asset_noise_sigma = j.value("sigma", model.asset_noise_sigma);
    model.distractor_penalty = j.value("delta", model.distractor_penalty);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed utility model: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("utility model offsets must be keyed by integer description id");
  }
  model.validate();
  return model;
}

UtilityModel load_utility_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open utility model " + path.string());
  try {
    return utility_model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("utility model is not valid JSON: " + std::string(e.what()));
  }
}

void save_utility_model(const UtilityModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write utility model " + path.string());
  out << to_json(model).dump(2) << '\n';
}

double true_utility(const KeywordMask& mask, std::int64_t description_id, const UtilityModel& model) {
  if (mask.size() != model.size())
    throw ValidationError("mask length " + std::to_string(mask.size()) + " does not match utility model size " +
                          std::to_string(model.size()));
  double u = 0;
  const auto it = model.description_offsets.find(description_id);
  if (it != model.description_offsets.end()) u += it->second;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) u += model.keyword_weights(static_cast<Eigen::Index>(i));
  for (const auto& [key, value] : model.interaction_terms)
    if (mask[key.first] && mask[key.second]) u += value;
  return u;
}

double mean_true_utility(const KeywordMask& mask, std::span<const std::int64_t> description_ids,
                         const UtilityModel& model) {
  if (description_ids.empty()) throw ValidationError("need at least one description");
  double sum = 0;
  for (auto d : description_ids) sum += true_utility(mask, d, model);
  return sum / static_cast<double>(description_ids.size());
}

double RenderedSet::mean_utility() const noexcept {
  double sum = 0;
  for (double u : utilities) sum += u;
  return sum / static_cast<double>(utilities.size());
}

RenderedSet render(std::int64_t description_id, CandidateId set_id, const KeywordMask& mask,
                   const UtilityModel& model, Rng& rng) {
  RenderedSet out;
  out.description_id = description_id;
  out.set_id = set_id;
  double center = true_utility(mask, description_id, model);
  if (is_distractor(set_id)) center -= model.distractor_penalty;
  if (model.asset_noise_sigma == 0.0) {
    out.utilities.fill(center);
    return out;
  }
  std::normal_distribution<double> noise(0.0, model.asset_noise_sigma);
  for (auto& u : out.utilities) u = center + noise(rng);
  return out;
}

double left_preference(double beta, double left_mean, double right_mean) {
  const double z = beta * (left_mean - right_mean);
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Side sim_judge(const SimWorker& worker, const RenderedSet& left, const RenderedSet& right, Rng& rng) {
  if (left.description_id != right.description_id)
    throw ValidationError("cannot compare renderings of different descriptions");
  if (worker.beta < 0) throw ValidationError("worker discrimination must be non-negative");
  const double p_left = worker.spammer ? 0.5 : left_preference(worker.beta, left.mean_utility(), right.mean_utility());
  return uniform01(rng) < p_left ? Side::left : Side::right;
}

std::uint64_t feasible_mask_count(std::size_t keyword_count, std::size_t cap) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(K, c)
  for (std::size_t c = 0; c <= std::min(cap, keyword_count); ++c) {
    total += binom;
    if (total > kBruteForceGuard) return total;
    binom = binom * (keyword_count - c) / (c + 1);
  }
  return total;
}

namespace {

struct Search {
  const UtilityModel& model;
  std::span<const std::int64_t> descriptions;
  std::size_t cap;
  KeywordMask current;
  BruteForceResult best;
  bool have_best = false;

  void visit() {
    ++best.enumerated;
    const double u = mean_true_utility(current, descriptions, model);
    if (!have_best || u > best.utility || (u == best.utility && current < best.mask)) {
      best.mask = current;
      best.utility = u;
      have_best = true;
    }
  }

  void extend(std::size_t from, std::size_t chosen) {
    for (std::size_t i = from; i < current.size(); ++i) {
      current.set(i);
      visit();
      if (chosen + 1 < cap) extend(i + 1, chosen + 1);
      current.set(i, false);
    }
  }
};

}  // namespace

BruteForceResult brute_force_best(const UtilityModel& model, std::span<const std::int64_t> description_ids,
                                  std::size_t keyword_count, std::size_t cap) {
  if (keyword_count != model.size()) throw ValidationError("catalog size does not match utility model");
  const auto count = feasible_mask_count(keyword_count, cap);
  if (count > kBruteForceGuard)
    throw CapacityError("brute force would enumerate more than " + std::to_string(kBruteForceGuard) + " masks");
  Search search{model, description_ids, cap, KeywordMask(keyword_count), {}, false};
  search.visit();
  if (cap > 0) search.extend(0, 0);
  return search.best;
}

}  // namespace promptga
