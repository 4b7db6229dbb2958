#pragma once

#include "promptga/errors.hpp"
#include "promptga/genome.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace promptga {

/// wins(i, j) = number of times set i was preferred over set j.
template <typename Scalar>
using OutcomeMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ScoreVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct BtOptions {
  /// Virtual wins added to every off-diagonal cell before fitting.
  double epsilon = 0.1;
  /// Convergence threshold on the max absolute change of log-scores.
  double tol = 1e-8;
  int max_iter = 10'000;
};

template <typename Scalar>
struct BtFit {
  ScoreVector<Scalar> scores;  // positive, sums to 1
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// Ford's condition: the "beat" digraph must be strongly connected for the
/// unregularised MLE to exist in the interior of the simplex.
template <typename Derived>
bool beats_graph_strongly_connected(const Eigen::MatrixBase<Derived>& wins) {
  const Eigen::Index n = wins.rows();
  const auto reach_all = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto w = forward ? wins(i, j) : wins(j, i);
        if (i != j && w > 0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    for (auto s : seen)
      if (!s) return false;
    return true;
  };
  return reach_all(true) && reach_all(false);
}

}  // namespace detail

/// Bradley-Terry maximum likelihood scores by minorization-maximization
/// (Hunter 2004): s_i <- W_i / sum_j N_ij / (s_i + s_j), then renormalise.
///
/// Throws ValidationError for malformed matrices and DataError when no
/// comparison is recorded, or when epsilon == 0 and the MLE does not exist.
/// Hitting max_iter returns the current iterate with converged == false.
template <typename Derived>
BtFit<typename Derived::Scalar> bt_fit(const Eigen::MatrixBase<Derived>& outcomes,
                                       const BtOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = outcomes.rows();
  if (outcomes.cols() != n) throw ValidationError("outcome matrix must be square");
  if (n < 2) throw ValidationError("Bradley-Terry needs at least two sets");
  if (options.epsilon < 0) throw ValidationError("epsilon must be non-negative");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (outcomes(i, i) != Scalar(0)) throw ValidationError("outcome matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(outcomes(i, j) >= Scalar(0))) throw ValidationError("outcome counts must be non-negative");
  }
  if (outcomes.sum() <= Scalar(0)) throw DataError("no comparisons recorded");
  if (options.epsilon == 0 && !detail::beats_graph_strongly_connected(outcomes))
    throw DataError("maximum likelihood scores do not exist: comparison graph is not strongly connected");

  OutcomeMatrix<Scalar> wins = outcomes;
  wins.array() += Scalar(options.epsilon);
  wins.diagonal().setZero();
  const OutcomeMatrix<Scalar> games = wins + wins.transpose();
  const ScoreVector<Scalar> won = wins.rowwise().sum();

  BtFit<Scalar> fit;
  fit.scores = ScoreVector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  ScoreVector<Scalar> next(n);
  for (fit.iterations = 1; fit.iterations <= options.max_iter; ++fit.iterations) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar denom = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i && games(i, j) > 0) denom += games(i, j) / (fit.scores(i) + fit.scores(j));
      next(i) = won(i) / denom;
    }
    next /= next.sum();
    const Scalar change = (next.array().log() - fit.scores.array().log()).abs().maxCoeff();
    fit.scores = next;
    if (change < Scalar(options.tol)) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) fit.iterations = options.max_iter;
  return fit;
}

/// Log-likelihood of normalised scores under wins (no smoothing).
template <typename DerivedW, typename DerivedS>
typename DerivedW::Scalar bt_log_likelihood(const Eigen::MatrixBase<DerivedW>& wins,
                                            const Eigen::MatrixBase<DerivedS>& scores) {
  using Scalar = typename DerivedW::Scalar;
  Scalar ll = 0;
  for (Eigen::Index i = 0; i < wins.rows(); ++i)
    for (Eigen::Index j = 0; j < wins.cols(); ++j)
      if (i != j && wins(i, j) > 0) ll += wins(i, j) * std::log(scores(i) / (scores(i) + scores(j)));
  return ll;
}

/// ranks: candidate id -> rank in 1..n, n = most appealing.
struct RankList {
  std::int64_t description_id = 0;
  std::map<CandidateId, int> ranks;
  friend bool operator==(const RankList&, const RankList&) = default;
};

/// Highest score gets rank n. Scores are compared after rounding to 1e-12;
/// tied candidates are ordered by id, the smaller id getting the lower rank.
RankList rank_from_scores(std::span<const double> scores, std::span<const CandidateId> ids,
                          std::int64_t description_id = 0);

inline RankList rank_from_scores(const ScoreVector<double>& scores, std::span<const CandidateId> ids,
                                 std::int64_t description_id = 0) {
  return rank_from_scores(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), ids,
                          description_id);
}

/// Throws StateError if the candidate is absent from any list.
double average_rank(std::span<const RankList> rank_lists, CandidateId candidate);

struct LeaderboardEntry {
  CandidateId id = 0;
  double average_rank = 0;
  friend bool operator==(const LeaderboardEntry&, const LeaderboardEntry&) = default;
};

/// Descending by average rank, ties by id ascending.
std::vector<LeaderboardEntry> leaderboard(std::span<const RankList> rank_lists,
                                          std::span<const CandidateId> candidate_ids);

/// `candidate_id,average_rank,popcount,mask_hex`.
void write_leaderboard_csv(std::ostream& out, std::span<const LeaderboardEntry> board,
                           const std::function<const KeywordMask&(CandidateId)>& mask_of);

}  // namespace promptga
