#include "promptga/scheduler.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace promptga {

std::string_view to_string(Side s) noexcept { return s == Side::left ? "left" : "right"; }

Side parse_side(std::string_view s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw ParseError("side must be 'left' or 'right', got '" + std::string(s) + "'");
}

nlohmann::json to_json(const ComparisonTask& task) {
  return {{"task_id", task.task_id},
          {"description_id", task.description_id},
          {"left_set", task.left_set},
          {"right_set", task.right_set},
          {"is_golden", task.is_golden}};
}

bool TaskPage::has_golden() const noexcept {
  return std::any_of(tasks.begin(), tasks.end(), [](const ComparisonTask& t) { return t.is_golden; });
}

namespace {

long double n_log2_n(std::int64_t n) {
  const auto x = static_cast<long double>(n);
  return n <= 1 ? 0.0L : x * std::log2(x);
}

std::int64_t ceil_budget(long double value) {
  // Guard against representation error just above an exact integer.
  const long double nearest = std::round(value);
  if (std::fabs(value - nearest) < 1e-9L) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(value));
}

ComparisonTask make_pair_task(std::int64_t description_id, CandidateId a, CandidateId b, Rng& rng,
                              IdCounters& ids) {
  ComparisonTask t;
  t.task_id = ids.take_task();
  t.description_id = description_id;
  if (uniform_int(rng, 0, 1) == 0) {
    t.left_set = a;
    t.right_set = b;
  } else {
    t.left_set = b;
    t.right_set = a;
  }
  return t;
}

}  // namespace

std::int64_t total_budget(std::int64_t n, std::int64_t k) {
  if (n < 1) throw RangeError("total_budget: n must be >= 1");
  if (k < 1) throw RangeError("total_budget: k must be >= 1");
  return ceil_budget(static_cast<long double>(k) * n_log2_n(n));
}

std::int64_t incremental_budget(std::int64_t n, std::int64_t k) {
  if (n < 1) throw RangeError("incremental_budget: n must be >= 1");
  if (k < 1) throw RangeError("incremental_budget: k must be >= 1");
  return ceil_budget(static_cast<long double>(k) * (n_log2_n(n + 1) - n_log2_n(n)));
}

BudgetLedger::BudgetLedger(std::int64_t k) : k_(k) {
  if (k < 1) throw RangeError("redundancy factor k must be >= 1");
}

void BudgetLedger::record(std::int64_t description_id, std::int64_t n_sets, std::int64_t pairs_added) {
  if (pairs_added < 0) throw ValidationError("cannot issue a negative number of pairs");
  auto& e = entries_[description_id];
  if (n_sets < e.n_sets) throw StateError("set count cannot shrink");
  e.n_sets = n_sets;
  e.pairs_issued += pairs_added;
}

const BudgetLedger::Entry& BudgetLedger::at(std::int64_t description_id) const {
  const auto it = entries_.find(description_id);
  if (it == entries_.end()) throw NotFoundError("no budget entry for description " + std::to_string(description_id));
  return it->second;
}

bool BudgetLedger::within_telescoping_bound(std::int64_t description_id) const {
  const auto& e = at(description_id);
  const auto lo = total_budget(e.n_sets, k_);
  return e.pairs_issued >= lo && e.pairs_issued <= lo + (e.n_sets - 1);
}

std::vector<ComparisonTask> sample_initial_pairs(std::int64_t description_id,
                                                 std::span<const CandidateId> set_ids, std::int64_t k,
                                                 Rng& rng, IdCounters& ids) {
  const auto n = static_cast<std::int64_t>(set_ids.size());
  if (n < 2) throw RangeError("need at least two keyword sets to form a pair");
  if (std::unordered_set<CandidateId>(set_ids.begin(), set_ids.end()).size() != set_ids.size())
    throw ValidationError("duplicate set id in initial round");
  const auto budget = total_budget(n, k);
  std::vector<ComparisonTask> tasks;
  tasks.reserve(static_cast<std::size_t>(budget));
  for (std::int64_t t = 0; t < budget; ++t) {
    // Uniform over unordered pairs: draw i, then j from the remaining n-1.
    const auto i = uniform_int<std::int64_t>(rng, 0, n - 1);
    auto j = uniform_int<std::int64_t>(rng, 0, n - 2);
    if (j >= i) ++j;
    tasks.push_back(make_pair_task(description_id, set_ids[static_cast<std::size_t>(i)],
                                   set_ids[static_cast<std::size_t>(j)], rng, ids));
  }
  return tasks;
}

std::vector<ComparisonTask> sample_incremental_pairs(std::int64_t description_id, CandidateId new_set,
                                                     std::span<const CandidateId> existing_sets,
                                                     std::int64_t k, Rng& rng, IdCounters& ids) {
  const auto n = static_cast<std::int64_t>(existing_sets.size());
  if (n < 1) throw RangeError("incremental round needs at least one existing set");
  if (std::find(existing_sets.begin(), existing_sets.end(), new_set) != existing_sets.end())
    throw ValidationError("set " + std::to_string(new_set) + " has already been evaluated");
  const auto budget = incremental_budget(n, k);
  std::vector<ComparisonTask> tasks;
  tasks.reserve(static_cast<std::size_t>(budget));
  for (std::int64_t t = 0; t < budget; ++t) {
    const auto j = uniform_int<std::int64_t>(rng, 0, n - 1);
    tasks.push_back(make_pair_task(description_id, new_set, existing_sets[static_cast<std::size_t>(j)], rng, ids));
  }
  return tasks;
}

std::vector<TaskPage> inject_golden(std::span<const ComparisonTask> tasks, std::size_t page_size,
                                    std::size_t pages_per_golden, const GoldenSource& source, Rng& rng,
                                    IdCounters& ids) {
  if (page_size < 1) throw ConfigError("page_size must be >= 1");
  if (pages_per_golden < 1) throw ConfigError("pages_per_golden must be >= 1");
  if (source.real_sets.empty()) throw ConfigError("golden source has no real-model sets");

  std::vector<TaskPage> pages;
  for (std::size_t start = 0; start < tasks.size(); start += page_size) {
    TaskPage page;
    page.page_id = ids.take_page();
    const auto end = std::min(tasks.size(), start + page_size);
    page.tasks.assign(tasks.begin() + static_cast<std::ptrdiff_t>(start),
                      tasks.begin() + static_cast<std::ptrdiff_t>(end));
    pages.push_back(std::move(page));
  }

  for (std::size_t run = 0; run < pages.size(); run += pages_per_golden) {
    const auto run_len = std::min(pages_per_golden, pages.size() - run);
    auto& page = pages[run + uniform_int<std::size_t>(rng, 0, run_len - 1)];
    const auto& anchor = page.tasks[uniform_int<std::size_t>(rng, 0, page.tasks.size() - 1)];
    const auto real = source.real_sets[uniform_int<std::size_t>(rng, 0, source.real_sets.size() - 1)];

    ComparisonTask golden;
    golden.task_id = ids.take_task();
    golden.description_id = anchor.description_id;
    golden.is_golden = true;
    const Side real_side = uniform_int(rng, 0, 1) == 0 ? Side::left : Side::right;
    golden.golden_answer = real_side;
    golden.left_set = real_side == Side::left ? real : distractor_of(real);
    golden.right_set = real_side == Side::left ? distractor_of(real) : real;

    const auto pos = uniform_int<std::size_t>(rng, 0, page.tasks.size());
    page.tasks.insert(page.tasks.begin() + static_cast<std::ptrdiff_t>(pos), golden);
  }
  return pages;
}

}  // namespace promptga
