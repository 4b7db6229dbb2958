#include "promptga/errors.hpp"
#include "promptga/genome.hpp"

#include <gtest/gtest.h>

using namespace promptga;

namespace {

EvaluatedCandidate ranked(CandidateId id, const std::string& bits, double rank) {
  return {id, KeywordMask::from_bits(bits), 0, rank};
}

KeywordMask random_mask(std::size_t k, double density, Rng& rng) {
  KeywordMask m(k);
  for (std::size_t i = 0; i < k; ++i) m.set(i, uniform01(rng) < density);
  return m;
}

}  // namespace

TEST(SelectParents, HighestAverageRankFirst) {
  const std::vector<EvaluatedCandidate> c = {ranked(0, "000", 3.5), ranked(1, "110", 14.25),
                                             ranked(2, "101", 43.60)};
  const auto [a, b] = select_parents(c);
  EXPECT_EQ(a, c[2].mask);
  EXPECT_EQ(b, c[1].mask);
}

TEST(SelectParents, TwoCandidatesAreForced) {
  const std::vector<EvaluatedCandidate> c = {ranked(0, "00", 1.0), ranked(1, "11", 2.0)};
  const auto [a, b] = select_parent_candidates(c);
  EXPECT_EQ(a->id, 1);
  EXPECT_EQ(b->id, 0);
}

TEST(SelectParents, TiesGoToLowerId) {
  const std::vector<EvaluatedCandidate> c = {ranked(3, "001", 5.0), ranked(2, "010", 10.0), ranked(1, "100", 10.0)};
  const auto [a, b] = select_parent_candidates(c);
  EXPECT_EQ(a->id, 1);
  EXPECT_EQ(b->id, 2);
}

TEST(SelectParents, NeedsTwoRankedCandidates) {
  EXPECT_THROW(select_parents(std::vector<EvaluatedCandidate>{ranked(0, "0", 1)}), StateError);
  std::vector<EvaluatedCandidate> unranked = {ranked(0, "0", 1), {1, KeywordMask::from_bits("1"), 0, std::nullopt}};
  EXPECT_THROW(select_parents(unranked), StateError);
}

TEST(Crossover, SegmentSwapTrace) {
  const auto [x, y] = crossover_segment(KeywordMask::from_bits("000000"), KeywordMask::from_bits("111111"), 2, 5);
  EXPECT_EQ(x.to_bits(), "001110");
  EXPECT_EQ(y.to_bits(), "110001");
}

TEST(Crossover, IdenticalParentsAndFullSegment) {
  Rng rng(1);
  const auto a = KeywordMask::from_bits("101100");
  const auto b = KeywordMask::from_bits("011010");
  for (int i = 0; i < 20; ++i) {
    const auto [x, y] = crossover(a, a, rng);
    EXPECT_EQ(x, a);
    EXPECT_EQ(y, a);
  }
  const auto [x, y] = crossover_segment(a, b, 0, 6);
  EXPECT_EQ(x, b);
  EXPECT_EQ(y, a);
}

TEST(Crossover, SegmentBoundsAreUniformOverValidPairs) {
  constexpr std::size_t k = 4;
  Rng rng(9);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  constexpr int draws = 100'000;
  for (int t = 0; t < draws; ++t) {
    const auto s = draw_segment(k, rng);
    ASSERT_LT(s.first, s.second);
    ASSERT_LE(s.second, k);
    ++counts[s];
  }
  ASSERT_EQ(counts.size(), k * (k + 1) / 2);
  const double expected = static_cast<double>(draws) / static_cast<double>(counts.size());
  double chi2 = 0;
  for (const auto& [s, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  // 9 degrees of freedom; the 0.999 quantile is 27.9.
  EXPECT_LT(chi2, 27.9);
}

TEST(Crossover, ConservesBitsPositionWise) {
  Rng rng(17);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_mask(23, 0.4, rng);
    const auto b = random_mask(23, 0.4, rng);
    const auto [x, y] = crossover(a, b, rng);
    for (std::size_t i = 0; i < 23; ++i) EXPECT_EQ(x[i] + y[i], a[i] + b[i]);
  }
}

TEST(Mutate, ZeroAndOne) {
  Rng rng(2);
  const auto m = KeywordMask::from_bits("1100101");
  EXPECT_EQ(mutate(m, 0.0, rng), m);
  EXPECT_EQ(mutate(m, 1.0, rng).to_bits(), "0011010");
  EXPECT_THROW(mutate(m, -0.1, rng), RangeError);
  EXPECT_THROW(mutate(m, 1.5, rng), RangeError);
}

TEST(Mutate, MeanFlipCountMatchesKp) {
  Rng rng(1234);
  const auto m = KeywordMask::zeros(100);
  double total = 0;
  for (int t = 0; t < 10'000; ++t) total += static_cast<double>(mutate(m, 0.01, rng).popcount());
  const double mean = total / 10'000;
  EXPECT_GE(mean, 0.9);
  EXPECT_LE(mean, 1.1);
}

TEST(Repair, FeasibleMaskIsUnchanged) {
  Rng rng(4);
  auto m = KeywordMask::zeros(30);
  for (std::size_t i = 0; i < 12; ++i) m.set(2 * i);
  EXPECT_EQ(repair(m, 15, rng), m);
}

TEST(Repair, ClearsOnlySetBitsDownToCap) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    auto m = KeywordMask::zeros(40);
    for (std::size_t i = 0; i < 20; ++i) m.set(uniform_int<std::size_t>(rng, 0, 39));
    const auto r = repair(m, 15, rng);
    EXPECT_EQ(r.popcount(), std::min<std::size_t>(m.popcount(), 15));
    for (std::size_t i = 0; i < 40; ++i) EXPECT_LE(r[i], m[i]);
  }
  EXPECT_EQ(repair(KeywordMask::ones(9), 0, rng), KeywordMask::zeros(9));
}

TEST(Repair, ClearedBitsAreUniform) {
  Rng rng(6);
  std::vector<int> kept(6, 0);
  for (int t = 0; t < 60'000; ++t) {
    const auto r = repair(KeywordMask::ones(6), 3, rng);
    for (std::size_t i = 0; i < 6; ++i) kept[i] += r[i];
  }
  for (int n : kept) EXPECT_NEAR(n / 60'000.0, 0.5, 0.01);
}

TEST(NextCandidate, DiffersFromEveryEvaluatedMask) {
  std::vector<EvaluatedCandidate> c = {ranked(0, "0000000000", 1.2), ranked(1, "1111100000", 1.8)};
  Rng rng(8);
  for (int step = 0; step < 40; ++step) {
    const auto g = next_candidate(c, 5, 0.1, rng);
    EXPECT_LE(g.mask.popcount(), 5u);
    for (const auto& e : c) EXPECT_NE(g.mask, e.mask);
    c.push_back({static_cast<CandidateId>(c.size()), g.mask, step + 1, 1.0 + uniform01(rng)});
  }
}

TEST(NextCandidate, ZeroAttemptsSaturatesImmediately) {
  const std::vector<EvaluatedCandidate> c = {ranked(0, "00", 1), ranked(1, "11", 2)};
  Rng rng(1);
  EXPECT_THROW(next_candidate(c, 2, 0.0, rng, 0), SaturationError);
}

TEST(NextCandidate, SaturatesWhenEveryOffspringIsKnown) {
  // Without mutation, crossover of 00 and 11 can only yield known masks or
  // 01/10; with both of those evaluated too nothing new is reachable.
  const std::vector<EvaluatedCandidate> c = {ranked(0, "00", 1), ranked(1, "11", 4), ranked(2, "01", 3),
                                             ranked(3, "10", 2)};
  Rng rng(1);
  EXPECT_THROW(next_candidate(c, 2, 0.0, rng, 64), SaturationError);
}

TEST(NextCandidate, RetriesUntilAFreshOffspringAppears) {
  // Parents 0000 and 1111. A first attempt whose segment covers everything
  // returns the parents themselves, so some seed must retry. Find one and
  // check that its result is fresh and came from a later attempt.
  const std::vector<EvaluatedCandidate> c = {ranked(0, "0000", 1), ranked(1, "1111", 2)};
  bool saw_retry = false;
  for (std::uint64_t seed = 0; seed < 200 && !saw_retry; ++seed) {
    Rng probe(seed);
    const auto first = draw_segment(4, probe);
    if (first != std::pair<std::size_t, std::size_t>{0, 4}) continue;
    Rng rng(seed);
    const auto g = next_candidate(c, 4, 0.0, rng);
    EXPECT_GE(g.attempts, 2);
    EXPECT_NE(g.mask, c[0].mask);
    EXPECT_NE(g.mask, c[1].mask);
    saw_retry = true;
  }
  EXPECT_TRUE(saw_retry);
}

TEST(NextCandidate, DeterministicPerSeed) {
  const std::vector<EvaluatedCandidate> c = {ranked(0, "0000000000", 1.5), ranked(1, "1010101010", 1.5)};
  Rng a(99), b(99);
  EXPECT_EQ(next_candidate(c, 4, 0.1, a).mask, next_candidate(c, 4, 0.1, b).mask);
}
