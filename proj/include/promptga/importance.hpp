#pragma once

#include "promptga/catalog.hpp"
#include "promptga/mask.hpp"
#include "promptga/random.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace promptga {

/// Rows of (mask features, target). Features are stored as a dense 0/1 matrix.
struct TrainingTable {
  Eigen::MatrixXd features;  // rows x K
  Eigen::VectorXd targets;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index feature_count() const noexcept { return features.cols(); }

  static TrainingTable from_masks(std::span<const KeywordMask> masks, std::span<const double> targets);
};

struct ForestOptions {
  int trees = 200;
  int max_depth = 6;
  int min_leaf = 2;
  double feature_fraction = 1.0 / 3.0;
  bool bootstrap = true;
};

struct TreeNode {
  // Leaves have feature == -1.
  Eigen::Index feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
  Eigen::Index samples = 0;
  /// Weighted impurity decrease: SSE(node) - SSE(left) - SSE(right).
  double sse_decrease = 0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct Forest {
  std::vector<RegressionTree> trees;
  Eigen::Index feature_count = 0;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict_all(const Eigen::MatrixXd& features) const;
};

/// Bagged CART regression trees grown greedily by variance reduction over a
/// random feature subset per split. Throws FitError for fewer than two rows
/// or when every feature is constant.
Forest fit_forest(const TrainingTable& table, const ForestOptions& options, Rng& rng);

struct ImportanceReport {
  Eigen::VectorXd importance;      // non-negative, sums to 1
  std::vector<std::size_t> ranking;  // feature indices, most important first
};

/// Per-feature SSE decrease summed over nodes, averaged over trees, normalised.
ImportanceReport impurity_importance(const Forest& forest);

/// Mean increase in squared error when a column is shuffled, floored at 0 and
/// normalised. Throws ValidationError when repeats < 1.
ImportanceReport permutation_importance(const Forest& forest, const TrainingTable& table, int repeats, Rng& rng);

/// Mean target over rows with the feature set / clear; NaN when no such row.
struct SelectionEffect {
  double mean_selected = 0;
  double mean_unselected = 0;
  /// +1 when selecting the keyword goes with a higher target, -1 lower, 0 unknown.
  int direction = 0;
};
std::vector<SelectionEffect> selection_effects(const TrainingTable& table);

/// `keyword,importance_impurity,importance_permutation,mean_rank_selected,mean_rank_unselected`.
void write_importance_csv(std::ostream& out, const KeywordCatalog& catalog, const ImportanceReport& impurity,
                          const ImportanceReport& permutation, std::span<const SelectionEffect> effects);

/// Bar-chart data for the top_n keywords by impurity importance.
nlohmann::json importance_plot_json(const KeywordCatalog& catalog, const ImportanceReport& impurity,
                                    const ImportanceReport& permutation, std::span<const SelectionEffect> effects,
                                    std::size_t top_n = 15);

}  // namespace promptga
