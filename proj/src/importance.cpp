#include "promptga/importance.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

namespace promptga {

TrainingTable TrainingTable::from_masks(std::span<const KeywordMask> masks, std::span<const double> targets) {
  if (masks.size() != targets.size()) throw ValidationError("mask and target counts differ");
  TrainingTable table;
  const auto k = masks.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(masks.front().size());
  table.features.resize(static_cast<Eigen::Index>(masks.size()), k);
  table.targets.resize(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t r = 0; r < masks.size(); ++r) {
    if (static_cast<Eigen::Index>(masks[r].size()) != k) throw ValidationError("masks differ in length");
    table.features.row(static_cast<Eigen::Index>(r)) = masks[r].as_vector<double>().transpose();
    table.targets(static_cast<Eigen::Index>(r)) = targets[r];
  }
  return table;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

double Forest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double sum = 0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd Forest::predict_all(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index r = 0; r < features.rows(); ++r) out(r) = predict(features.row(r));
  return out;
}

namespace {

struct Split {
  Eigen::Index feature = -1;
  double threshold = 0;
  double decrease = 0;
};

double sse(const Eigen::VectorXd& y, std::span<const Eigen::Index> rows) {
  double s = 0, s2 = 0;
  for (auto r : rows) {
    s += y(r);
    s2 += y(r) * y(r);
  }
  return std::max(0.0, s2 - s * s / static_cast<double>(rows.size()));
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingTable& table, const ForestOptions& options, Rng& rng)
      : x_(table.features), y_(table.targets), options_(options), rng_(rng) {}

  RegressionTree build(std::vector<Eigen::Index> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, std::vector<Eigen::Index> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double mean = 0;
    for (auto r : rows) mean += y_(r);
    mean /= static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].value = mean;
    tree.nodes[static_cast<std::size_t>(id)].samples = static_cast<Eigen::Index>(rows.size());

    const auto n = static_cast<int>(rows.size());
    if (depth >= options_.max_depth || n < 2 * options_.min_leaf) return id;
    const double node_sse = sse(y_, rows);
    if (node_sse <= 0) return id;

    const auto split = best_split(rows, node_sse);
    if (split.feature < 0) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(tree, std::move(left), depth + 1);
    const int rgt = grow(tree, std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rgt;
    node.sse_decrease = split.decrease;
    return id;
  }

  Split best_split(const std::vector<Eigen::Index>& rows, double node_sse) {
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      const double first = x_(rows.front(), f);
      for (auto r : rows) {
        if (x_(r, f) != first) {
          candidates.push_back(f);
          break;
        }
      }
    }
    if (candidates.empty()) return {};
    const auto wanted = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(options_.feature_fraction * static_cast<double>(x_.cols()) + 1e-9)), 1,
        candidates.size());
    if (wanted < candidates.size()) {
      std::shuffle(candidates.begin(), candidates.end(), rng_);
      candidates.resize(wanted);
      std::sort(candidates.begin(), candidates.end());
    }

    Split best;
    std::vector<std::pair<double, double>> column(rows.size());
    const auto n = rows.size();
    double total = 0, total2 = 0;
    for (auto r : rows) {
      total += y_(r);
      total2 += y_(r) * y_(r);
    }
    for (auto f : candidates) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(rows[i], f), y_(rows[i])};
      std::sort(column.begin(), column.end());
      double s = 0, s2 = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        s += column[i].second;
        s2 += column[i].second * column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const auto nl = i + 1;
        const auto nr = n - nl;
        if (nl < static_cast<std::size_t>(options_.min_leaf) || nr < static_cast<std::size_t>(options_.min_leaf))
          continue;
        const double sse_l = std::max(0.0, s2 - s * s / static_cast<double>(nl));
        const double rs = total - s;
        const double sse_r = std::max(0.0, (total2 - s2) - rs * rs / static_cast<double>(nr));
        const double decrease = node_sse - sse_l - sse_r;
        if (decrease > best.decrease + 1e-12) {
          best = {f, 0.5 * (column[i].first + column[i + 1].first), decrease};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const ForestOptions& options_;
  Rng& rng_;
};

ImportanceReport normalized_report(Eigen::VectorXd raw) {
  raw = raw.cwiseMax(0.0);
  const double total = raw.sum();
  ImportanceReport report;
  const auto k = raw.size();
  // No information at all (constant target): spread evenly.
  report.importance = total > 0 ? Eigen::VectorXd(raw / total)
                                : Eigen::VectorXd::Constant(k, k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
  report.ranking.resize(static_cast<std::size_t>(k));
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
    return report.importance(static_cast<Eigen::Index>(a)) > report.importance(static_cast<Eigen::Index>(b));
  });
  return report;
}

double mse(const Forest& forest, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (forest.predict_all(x) - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

Forest fit_forest(const TrainingTable& table, const ForestOptions& options, Rng& rng) {
  if (table.rows() < 2) throw FitError("need at least two rows to fit a forest");
  if (table.targets.size() != table.rows()) throw FitError("target count does not match row count");
  if (options.trees < 1) throw FitError("need at least one tree");
  if (options.max_depth < 0 || options.min_leaf < 1) throw FitError("invalid tree size limits");
  if (!(options.feature_fraction > 0.0 && options.feature_fraction <= 1.0))
    throw FitError("feature_fraction must lie in (0, 1]");
  bool any_varying = false;
  for (Eigen::Index f = 0; f < table.feature_count() && !any_varying; ++f)
    any_varying = table.features.col(f).maxCoeff() != table.features.col(f).minCoeff();
  if (!any_varying) throw FitError("every feature is constant");

  Forest forest;
  forest.feature_count = table.feature_count();
  const auto base_seed = rng();
  const auto n = table.rows();
  for (int t = 0; t < options.trees; ++t) {
    // Per-tree streams keep each tree independent of fitting order.
    auto tree_rng = derive_rng(base_seed, {static_cast<std::uint64_t>(t)});
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (options.bootstrap) {
      for (auto& r : rows) r = uniform_int<Eigen::Index>(tree_rng, 0, n - 1);
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    forest.trees.push_back(TreeBuilder(table, options, tree_rng).build(std::move(rows)));
  }
  return forest;
}

ImportanceReport impurity_importance(const Forest& forest) {
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(forest.feature_count);
  for (const auto& tree : forest.trees)
    for (const auto& node : tree.nodes)
      if (node.feature >= 0) raw(node.feature) += node.sse_decrease;
  if (!forest.trees.empty()) raw /= static_cast<double>(forest.trees.size());
  return normalized_report(std::move(raw));
}

ImportanceReport permutation_importance(const Forest& forest, const TrainingTable& table, int repeats, Rng& rng) {
  if (repeats < 1) throw ValidationError("permutation importance needs at least one repeat");
  if (table.feature_count() != forest.feature_count) throw ValidationError("table does not match forest features");
  const double base = mse(forest, table.features, table.targets);
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(forest.feature_count);
  Eigen::MatrixXd shuffled = table.features;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(table.rows()));
  for (Eigen::Index f = 0; f < forest.feature_count; ++f) {
    double increase = 0;
    for (int r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index i = 0; i < table.rows(); ++i)
        shuffled(i, f) = table.features(perm[static_cast<std::size_t>(i)], f);
      increase += mse(forest, shuffled, table.targets) - base;
    }
    shuffled.col(f) = table.features.col(f);
    raw(f) = increase / repeats;
  }
  return normalized_report(std::move(raw));
}

std::vector<SelectionEffect> selection_effects(const TrainingTable& table) {
  std::vector<SelectionEffect> out(static_cast<std::size_t>(table.feature_count()));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index f = 0; f < table.feature_count(); ++f) {
    double sel = 0, unsel = 0;
    int n_sel = 0, n_unsel = 0;
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      if (table.features(r, f) > 0.5) {
        sel += table.targets(r);
        ++n_sel;
      } else {
        unsel += table.targets(r);
        ++n_unsel;
      }
    }
    auto& e = out[static_cast<std::size_t>(f)];
    e.mean_selected = n_sel ? sel / n_sel : nan;
    e.mean_unselected = n_unsel ? unsel / n_unsel : nan;
    if (n_sel && n_unsel) e.direction = e.mean_selected > e.mean_unselected ? 1 : (e.mean_selected < e.mean_unselected ? -1 : 0);
  }
  return out;
}

namespace {

void write_number(std::ostream& out, double v) {
  if (std::isfinite(v)) out << std::setprecision(8) << v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

void write_importance_csv(std::ostream& out, const KeywordCatalog& catalog, const ImportanceReport& impurity,
                          const ImportanceReport& permutation, std::span<const SelectionEffect> effects) {
  out << "keyword,importance_impurity,importance_permutation,mean_rank_selected,mean_rank_unselected\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out << csv_field(catalog[i].text) << ',';
    write_number(out, impurity.importance(idx));
    out << ',';
    write_number(out, permutation.importance(idx));
    out << ',';
    write_number(out, effects[i].mean_selected);
    out << ',';
    write_number(out, effects[i].mean_unselected);
    out << '\n';
  }
}

nlohmann::json importance_plot_json(const KeywordCatalog& catalog, const ImportanceReport& impurity,
                                    const ImportanceReport& permutation, std::span<const SelectionEffect> effects,
                                    std::size_t top_n) {
  nlohmann::json bars = nlohmann::json::array();
  for (std::size_t r = 0; r < std::min(top_n, impurity.ranking.size()); ++r) {
    const auto i = impurity.ranking[r];
    const auto idx = static_cast<Eigen::Index>(i);
    bars.push_back({{"keyword", catalog[i].text},
                    {"importance_impurity", impurity.importance(idx)},
                    {"importance_permutation", permutation.importance(idx)},
                    {"direction", effects[i].direction}});
  }
  return {{"title", "Importance of the most important keywords"},
          {"note", "importance measures influence on the metric, not whether a keyword helps; see direction"},
          {"bars", bars}};
}

}  // namespace promptga
