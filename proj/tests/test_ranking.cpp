#include "promptga/errors.hpp"
#include "promptga/ranking.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace promptga;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr BtOptions kExact{0.0, 1e-12, 100'000};

// Maximises the log-likelihood of two-item BT over a 1e-4 grid.
double grid_two(double w01, double w10) {
  double best_p = 0, best_ll = -1e300;
  for (int i = 1; i < 10'000; ++i) {
    const double p = i * 1e-4;
    const double ll = w01 * std::log(p) + w10 * std::log(1 - p);
    if (ll > best_ll) best_ll = ll, best_p = p;
  }
  return best_p;
}

MatrixXd random_connected_wins(int n, Rng& rng) {
  while (true) {
    MatrixXd w = MatrixXd::Zero(n, n);
    for (int t = 0; t < 4 * n; ++t) {
      const int i = uniform_int(rng, 0, n - 1);
      int j = uniform_int(rng, 0, n - 2);
      if (j >= i) ++j;
      w(i, j) += 1;
    }
    if (detail::beats_graph_strongly_connected(w)) return w;
  }
}

std::vector<CandidateId> iota_ids(int n) {
  std::vector<CandidateId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TEST(BradleyTerry, TwoItemsMatchWinFraction) {
  MatrixXd w(2, 2);
  w << 0, 3, 1, 0;
  const auto fit = bt_fit(w, kExact);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.scores(0), 0.75, 1e-9);
  EXPECT_NEAR(fit.scores(1), 0.25, 1e-9);
  EXPECT_NEAR(fit.scores(0), grid_two(3, 1), 1e-4);
}

TEST(BradleyTerry, SymmetricOutcomesGiveEqualScores) {
  MatrixXd w(2, 2);
  w << 0, 2, 2, 0;
  const auto fit = bt_fit(w);
  EXPECT_NEAR(fit.scores(0), 0.5, 1e-12);
  MatrixXd cyc = MatrixXd::Zero(3, 3);
  cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1;
  const auto c = bt_fit(cyc, kExact);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c.scores(i), 1.0 / 3.0, 1e-9);
}

TEST(BradleyTerry, ScoresArePositiveAndNormalised) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const int n = uniform_int(rng, 2, 7);
    MatrixXd w = MatrixXd::Zero(n, n);
    for (int k = 0; k < 10; ++k) w(uniform_int(rng, 0, n - 1), uniform_int(rng, 0, n - 1)) += 1;
    w.diagonal().setZero();
    if (w.sum() == 0) continue;
    const auto fit = bt_fit(w);
    EXPECT_NEAR(fit.scores.sum(), 1.0, 1e-9);
    EXPECT_GT(fit.scores.minCoeff(), 0.0);
  }
}

TEST(BradleyTerry, MatchesClosedFormStationaryPoint) {
  // At the MLE, each item's wins equal its expected wins.
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd w = random_connected_wins(5, rng);
    const auto s = bt_fit(w, kExact).scores;
    for (int i = 0; i < 5; ++i) {
      double expected = 0;
      for (int j = 0; j < 5; ++j)
        if (j != i) expected += (w(i, j) + w(j, i)) * s(i) / (s(i) + s(j));
      EXPECT_NEAR(expected, w.row(i).sum(), 1e-7);
    }
  }
}

TEST(BradleyTerry, GridSearchOracleOnThreeItems) {
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const MatrixXd w = random_connected_wins(3, rng);
    const auto s = bt_fit(w, kExact).scores;
    VectorXd best(3);
    double best_ll = -1e300;
    VectorXd p(3);
    for (int a = 1; a < 1000; ++a)
      for (int b = 1; a + b < 1000; ++b) {
        p << a * 1e-3, b * 1e-3, 1 - (a + b) * 1e-3;
        const double ll = bt_log_likelihood(w, p);
        if (ll > best_ll) best_ll = ll, best = p;
      }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(i), best(i), 2e-3);
  }
}

TEST(BradleyTerry, DuplicatingOutcomesLeavesScoresUnchanged) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd w = random_connected_wins(4, rng);
    const auto a = bt_fit(w, kExact).scores;
    const auto b = bt_fit(MatrixXd(2 * w), kExact).scores;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(BradleyTerry, ExtraWinNeverLowersTheWinner) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int n = uniform_int(rng, 2, 4);
    const MatrixXd w = random_connected_wins(n, rng);
    const int i = uniform_int(rng, 0, n - 1);
    int j = uniform_int(rng, 0, n - 2);
    if (j >= i) ++j;
    MatrixXd w2 = w;
    w2(i, j) += 1;
    for (const double eps : {0.0, 0.1}) {
      const BtOptions o{eps, 1e-12, 100'000};
      EXPECT_GE(bt_fit(w2, o).scores(i), bt_fit(w, o).scores(i) - 1e-10);
    }
  }
}

TEST(BradleyTerry, RankingIsPermutationEquivariant) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const int n = 5;
    const MatrixXd w = random_connected_wins(n, rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd pw(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) pw(perm[a], perm[b]) = w(a, b);
    const auto s = bt_fit(w).scores;
    const auto ps = bt_fit(pw).scores;
    // Relabel ids consistently, then ranks must follow the set, not the slot.
    const auto ids = iota_ids(n);
    std::vector<CandidateId> pids(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) pids[static_cast<std::size_t>(perm[a])] = a;
    const auto r = rank_from_scores(s, ids);
    const auto pr = rank_from_scores(ps, pids);
    for (int a = 0; a < n; ++a) {
      EXPECT_NEAR(s(a), ps(perm[a]), 1e-9);
      // Exact ties may legitimately break differently; only compare strict orders.
      bool tied = false;
      for (int b = 0; b < n; ++b) tied |= b != a && std::abs(s(a) - s(b)) < 1e-9;
      if (!tied) EXPECT_EQ(r.ranks.at(a), pr.ranks.at(a));
    }
  }
}

TEST(BradleyTerry, RejectsMalformedInput) {
  EXPECT_THROW(bt_fit(MatrixXd::Zero(2, 3)), ValidationError);
  EXPECT_THROW(bt_fit(MatrixXd::Zero(1, 1)), ValidationError);
  EXPECT_THROW(bt_fit(MatrixXd::Zero(3, 3)), DataError);
  MatrixXd neg = MatrixXd::Zero(2, 2);
  neg(0, 1) = -1;
  EXPECT_THROW(bt_fit(neg), ValidationError);
  MatrixXd diag = MatrixXd::Zero(2, 2);
  diag(0, 0) = 1;
  diag(0, 1) = 1;
  EXPECT_THROW(bt_fit(diag), ValidationError);
}

TEST(BradleyTerry, UnregularisedFitNeedsStrongConnectivity) {
  MatrixXd w = MatrixXd::Zero(2, 2);
  w(0, 1) = 3;
  EXPECT_THROW(bt_fit(w, kExact), DataError);
  const auto smoothed = bt_fit(w);
  EXPECT_TRUE(smoothed.converged);
  EXPECT_GT(smoothed.scores(0), smoothed.scores(1));
}

TEST(BradleyTerry, ReportsNonConvergence) {
  MatrixXd w(3, 3);
  w << 0, 9, 1, 2, 0, 7, 5, 3, 0;
  const auto fit = bt_fit(w, BtOptions{0.1, 1e-15, 2});
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations, 2);
}

TEST(BradleyTerry, SinglePrecision) {
  Eigen::MatrixXf w(2, 2);
  w << 0, 3, 1, 0;
  const auto fit = bt_fit(w, BtOptions{0.0, 1e-5, 1000});
  EXPECT_NEAR(fit.scores(0), 0.75f, 1e-4f);
}

TEST(RankFromScores, Examples) {
  const auto ids2 = iota_ids(2);
  const auto r = rank_from_scores(std::vector<double>{0.75, 0.25}, ids2);
  EXPECT_EQ(r.ranks, (std::map<CandidateId, int>{{0, 2}, {1, 1}}));
  const auto ids3 = iota_ids(3);
  EXPECT_EQ(rank_from_scores(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, ids3).ranks,
            (std::map<CandidateId, int>{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(rank_from_scores(std::vector<double>{0.2, 0.5, 0.3}, ids3).ranks,
            (std::map<CandidateId, int>{{0, 1}, {1, 3}, {2, 2}}));
}

TEST(RankFromScores, NearlyEqualScoresAreTied) {
  const std::vector<CandidateId> ids = {5, 2};
  const auto r = rank_from_scores(std::vector<double>{0.5, 0.5 - 1e-15}, ids, 9);
  EXPECT_EQ(r.description_id, 9);
  EXPECT_EQ(r.ranks.at(2), 1);
  EXPECT_EQ(r.ranks.at(5), 2);
}

TEST(AverageRank, Examples) {
  const std::vector<RankList> lists = {{0, {{7, 1}, {8, 2}}}, {1, {{7, 2}, {8, 1}}}};
  EXPECT_DOUBLE_EQ(average_rank(lists, 7), 1.5);
  const std::vector<RankList> same = {{0, {{7, 3}}}, {1, {{7, 3}}}, {2, {{7, 3}}}};
  EXPECT_DOUBLE_EQ(average_rank(same, 7), 3.0);
  EXPECT_THROW(average_rank(lists, 9), StateError);
  EXPECT_THROW(average_rank(std::vector<RankList>{}, 7), StateError);
}

TEST(AverageRank, BoundedByCandidateCount) {
  Rng rng(7);
  const int n = 56;
  std::vector<RankList> lists;
  for (int d = 0; d < 10; ++d) {
    std::vector<double> s(n);
    for (auto& x : s) x = uniform01(rng);
    lists.push_back(rank_from_scores(s, iota_ids(n), d));
  }
  for (CandidateId c = 0; c < n; ++c) {
    const double a = average_rank(lists, c);
    EXPECT_GE(a, 1.0);
    EXPECT_LE(a, 56.0);
  }
  std::vector<double> best(n, 0.0);
  best[3] = 1.0;
  const std::vector<RankList> top = {rank_from_scores(best, iota_ids(n))};
  EXPECT_DOUBLE_EQ(average_rank(top, 3), 56.0);
}

TEST(Leaderboard, OrdersDescendingWithIdTieBreak) {
  // Three candidates whose mean ranks over four descriptions are 1.25, 2.25 and 2.5.
  const std::vector<RankList> lists = {{0, {{0, 1}, {1, 2}, {2, 3}}},
                                       {1, {{0, 1}, {1, 3}, {2, 2}}},
                                       {2, {{0, 2}, {1, 1}, {2, 3}}},
                                       {3, {{0, 1}, {1, 3}, {2, 2}}}};
  const std::vector<CandidateId> ids = {0, 1, 2};
  const auto board = leaderboard(lists, ids);
  ASSERT_EQ(board.size(), 3u);
  EXPECT_EQ(board[0].id, 2);
  EXPECT_EQ(board[1].id, 1);
  EXPECT_EQ(board[2].id, 0);

  const std::vector<RankList> tie = {{0, {{4, 1}, {3, 2}}}, {1, {{4, 2}, {3, 1}}}};
  const std::vector<CandidateId> tie_ids = {4, 3};
  const auto t = leaderboard(tie, tie_ids);
  EXPECT_EQ(t[0].id, 3);
  EXPECT_EQ(t[1].id, 4);

  const std::vector<RankList> single = {{0, {{9, 1}}}};
  const std::vector<CandidateId> one = {9};
  EXPECT_EQ(leaderboard(single, one).size(), 1u);
}

TEST(Leaderboard, CsvFormat) {
  const std::vector<LeaderboardEntry> board = {{1, 43.6}, {0, 3.5}};
  const std::vector<KeywordMask> masks = {KeywordMask::zeros(10), KeywordMask::from_bits("1000000001")};
  std::ostringstream out;
  write_leaderboard_csv(out, board, [&](CandidateId id) -> const KeywordMask& { return masks.at(id); });
  EXPECT_EQ(out.str(), "candidate_id,average_rank,popcount,mask_hex\n1,43.6,2,0102\n0,3.5,0,0000\n");
}
