#pragma once

#include "promptga/orchestrator.hpp"
#include "promptga/simulator.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace promptga {

/// Synthetic crowd for simulate mode. Every draw is derived from (run seed,
/// worker, task), and worker selection from (run seed, log offset), so the
/// crowd is a pure function of the run state and can resume after a restart.
class SimulatedCrowd {
 public:
  SimulatedCrowd(const RunConfig& config, const UtilityModel& model);

  SimWorker worker(std::size_t index) const;
  /// Five real-vs-distractor items, all of which must be answered correctly.
  bool passes_qualification(std::size_t index, const Run& run) const;

  /// Judges every open task. Returns the number of judgments submitted.
  std::size_t judge_open_tasks(Run& run);

  /// Cached four-asset rendering of a (description, set) pair.
  const RenderedSet& rendering(const Run& run, std::int64_t description_id, CandidateId set_id);

 private:
  std::vector<std::size_t> active_pool(const Run& run) const;

  const RunConfig& config_;
  const UtilityModel& model_;
  std::map<std::pair<std::int64_t, CandidateId>, RenderedSet> renders_;
};

/// Judge-then-step until the run is terminal (or `until_generation` is
/// reached). Returns the number of steps taken.
int simulate(Run& run, std::optional<int> until_generation = std::nullopt);

}  // namespace promptga
