#pragma once

#include "promptga/mask.hpp"
#include "promptga/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace promptga {

using CandidateId = std::int64_t;

struct EvaluatedCandidate {
  CandidateId id = 0;
  KeywordMask mask;
  int generation = 0;
  /// Mean per-description rank; empty until the first aggregation.
  std::optional<double> average_rank;
};

inline constexpr int kDefaultMaxAttempts = 64;

/// The two candidates with the highest average rank, best first. Ties go to
/// the lower id. Throws StateError with fewer than two ranked candidates.
std::pair<const EvaluatedCandidate*, const EvaluatedCandidate*> select_parent_candidates(
    std::span<const EvaluatedCandidate> evaluated);

std::pair<KeywordMask, KeywordMask> select_parents(std::span<const EvaluatedCandidate> evaluated);

/// Swaps bits [begin, end) between the two parents.
std::pair<KeywordMask, KeywordMask> crossover_segment(const KeywordMask& a, const KeywordMask& b,
                                                      std::size_t begin, std::size_t end);

/// Draws (begin, end) uniformly from {(i, j) : 0 <= i < j <= K}.
std::pair<std::size_t, std::size_t> draw_segment(std::size_t length, Rng& rng);

std::pair<KeywordMask, KeywordMask> crossover(const KeywordMask& a, const KeywordMask& b, Rng& rng);

/// Flips each bit independently with probability p.
KeywordMask mutate(const KeywordMask& mask, double p, Rng& rng);

/// Clears uniformly chosen set bits until popcount <= cap.
KeywordMask repair(const KeywordMask& mask, std::size_t cap, Rng& rng);

struct GeneratedCandidate {
  KeywordMask mask;
  int attempts = 0;
};

/// select -> crossover -> mutate -> repair; returns the first offspring not
/// already evaluated, retrying with fresh randomness. Throws SaturationError
/// when max_attempts runs out.
GeneratedCandidate next_candidate(std::span<const EvaluatedCandidate> evaluated, std::size_t cap,
                                  double mutation_p, Rng& rng, int max_attempts = kDefaultMaxAttempts);

}  // namespace promptga
