#include "promptga/genome.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

namespace promptga {

std::pair<const EvaluatedCandidate*, const EvaluatedCandidate*> select_parent_candidates(
    std::span<const EvaluatedCandidate> evaluated) {
  std::vector<const EvaluatedCandidate*> ranked;
  for (const auto& c : evaluated) {
    if (!c.average_rank) throw StateError("candidate " + std::to_string(c.id) + " has no average rank yet");
    ranked.push_back(&c);
  }
  if (ranked.size() < 2) throw StateError("selection needs at least two evaluated candidates");
  std::partial_sort(ranked.begin(), ranked.begin() + 2, ranked.end(),
                    [](const EvaluatedCandidate* a, const EvaluatedCandidate* b) {
                      if (*a->average_rank != *b->average_rank) return *a->average_rank > *b->average_rank;
                      return a->id < b->id;
                    });
  return {ranked[0], ranked[1]};
}

std::pair<KeywordMask, KeywordMask> select_parents(std::span<const EvaluatedCandidate> evaluated) {
  const auto [first, second] = select_parent_candidates(evaluated);
  return {first->mask, second->mask};
}

std::pair<KeywordMask, KeywordMask> crossover_segment(const KeywordMask& a, const KeywordMask& b,
                                                      std::size_t begin, std::size_t end) {
  if (a.size() != b.size()) throw ValidationError("crossover parents differ in length");
  if (begin > end || end > a.size()) throw RangeError("crossover segment out of range");
  KeywordMask first = a;
  KeywordMask second = b;
  for (std::size_t i = begin; i < end; ++i) {
    first.set(i, b[i]);
    second.set(i, a[i]);
  }
  return {std::move(first), std::move(second)};
}

std::pair<std::size_t, std::size_t> draw_segment(std::size_t length, Rng& rng) {
  if (length == 0) return {0, 0};
  // Pairs with end j number j for j = 1..K; pick one of K(K+1)/2 uniformly.
  const std::uint64_t total = static_cast<std::uint64_t>(length) * (length + 1) / 2;
  std::uint64_t r = uniform_int<std::uint64_t>(rng, 0, total - 1);
  std::size_t end = 1;
  while (r >= end) {
    r -= end;
    ++end;
  }
  return {static_cast<std::size_t>(r), end};
}

std::pair<KeywordMask, KeywordMask> crossover(const KeywordMask& a, const KeywordMask& b, Rng& rng) {
  if (a.size() != b.size()) throw ValidationError("crossover parents differ in length");
  const auto [begin, end] = draw_segment(a.size(), rng);
  return crossover_segment(a, b, begin, end);
}

KeywordMask mutate(const KeywordMask& mask, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("mutation probability must lie in [0, 1]");
  KeywordMask out = mask;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (uniform01(rng) < p) out.flip(i);
  return out;
}

KeywordMask repair(const KeywordMask& mask, std::size_t cap, Rng& rng) {
  auto set_bits = mask.indices();
  if (set_bits.size() <= cap) return mask;
  std::shuffle(set_bits.begin(), set_bits.end(), rng);
  KeywordMask out = mask;
  for (std::size_t i = 0; i < set_bits.size() - cap; ++i) out.set(set_bits[i], false);
  return out;
}

GeneratedCandidate next_candidate(std::span<const EvaluatedCandidate> evaluated, std::size_t cap,
                                  double mutation_p, Rng& rng, int max_attempts) {
  if (max_attempts <= 0) throw SaturationError("no attempts left to generate a new candidate");
  const auto [first, second] = select_parents(evaluated);
  std::unordered_set<KeywordMask, KeywordMaskHash> seen;
  for (const auto& c : evaluated) seen.insert(c.mask);

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto [child_a, child_b] = crossover(first, second, rng);
    child_a = mutate(child_a, mutation_p, rng);
    child_b = mutate(child_b, mutation_p, rng);
    child_a = repair(child_a, cap, rng);
    child_b = repair(child_b, cap, rng);
    if (!seen.contains(child_a)) return {std::move(child_a), attempt};
    if (!seen.contains(child_b)) return {std::move(child_b), attempt};
  }
  throw SaturationError("every offspring in " + std::to_string(max_attempts) +
                        " attempts duplicated an evaluated candidate");
}

}  // namespace promptga
