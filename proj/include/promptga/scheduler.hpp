#pragma once

#include "promptga/genome.hpp"
#include "promptga/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace promptga {

enum class Side { left, right };

std::string_view to_string(Side s) noexcept;
Side parse_side(std::string_view s);
constexpr Side opposite(Side s) noexcept { return s == Side::left ? Side::right : Side::left; }

/// Distractor sets (weak-generator renderings used only in golden tasks) are
/// encoded as negative set ids so they never collide with candidates.
constexpr CandidateId distractor_of(CandidateId real) noexcept { return -real - 1; }
constexpr bool is_distractor(CandidateId id) noexcept { return id < 0; }
constexpr CandidateId real_of_distractor(CandidateId id) noexcept { return -id - 1; }

using TaskId = std::int64_t;
using PageId = std::int64_t;

struct ComparisonTask {
  TaskId task_id = 0;
  std::int64_t description_id = 0;
  CandidateId left_set = 0;
  CandidateId right_set = 0;
  bool is_golden = false;
  std::optional<Side> golden_answer;

  CandidateId set_on(Side s) const noexcept { return s == Side::left ? left_set : right_set; }
  friend bool operator==(const ComparisonTask&, const ComparisonTask&) = default;
};

/// Wire form; golden_answer is deliberately absent.
nlohmann::json to_json(const ComparisonTask& task);

struct TaskPage {
  PageId page_id = 0;
  std::vector<ComparisonTask> tasks;
  bool has_golden() const noexcept;
};

/// Monotone id sources shared by everything that creates tasks or pages.
struct IdCounters {
  TaskId next_task = 0;
  PageId next_page = 0;
  TaskId take_task() noexcept { return next_task++; }
  PageId take_page() noexcept { return next_page++; }
  friend bool operator==(const IdCounters&, const IdCounters&) = default;
};

/// ceil(k * n * log2 n).
std::int64_t total_budget(std::int64_t n, std::int64_t k);

/// ceil(k * ((n+1) log2(n+1) - n log2 n)): pairs to add when set n+1 joins.
std::int64_t incremental_budget(std::int64_t n, std::int64_t k);

/// Per-description pair counts.
class BudgetLedger {
 public:
  struct Entry {
    std::int64_t pairs_issued = 0;
    std::int64_t n_sets = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit BudgetLedger(std::int64_t k = 3);

  std::int64_t k() const noexcept { return k_; }
  void record(std::int64_t description_id, std::int64_t n_sets, std::int64_t pairs_added);
  const Entry& at(std::int64_t description_id) const;
  const std::map<std::int64_t, Entry>& entries() const noexcept { return entries_; }
  /// pairs_issued lies in [total_budget(n), total_budget(n) + n - 1].
  bool within_telescoping_bound(std::int64_t description_id) const;

  friend bool operator==(const BudgetLedger&, const BudgetLedger&) = default;

 private:
  std::int64_t k_;
  std::map<std::int64_t, Entry> entries_;
};

/// total_budget(n, k) tasks, each an unordered pair drawn uniformly with
/// replacement from the C(n,2) pairs; sides uniform.
std::vector<ComparisonTask> sample_initial_pairs(std::int64_t description_id,
                                                 std::span<const CandidateId> set_ids, std::int64_t k,
                                                 Rng& rng, IdCounters& ids);

/// incremental_budget(n, k) tasks pairing new_set with uniformly drawn
/// existing sets; sides uniform.
std::vector<ComparisonTask> sample_incremental_pairs(std::int64_t description_id, CandidateId new_set,
                                                     std::span<const CandidateId> existing_sets,
                                                     std::int64_t k, Rng& rng, IdCounters& ids);

/// Real-model sets a golden task may show against their distractors.
struct GoldenSource {
  std::vector<CandidateId> real_sets;
};

/// Groups tasks into pages of page_size; every run of pages_per_golden
/// consecutive pages gets exactly one golden task on a uniformly chosen page.
std::vector<TaskPage> inject_golden(std::span<const ComparisonTask> tasks, std::size_t page_size,
                                    std::size_t pages_per_golden, const GoldenSource& source, Rng& rng,
                                    IdCounters& ids);

}  // namespace promptga
