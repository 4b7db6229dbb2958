#pragma once

#include "promptga/catalog.hpp"
#include "promptga/config.hpp"
#include "promptga/genome.hpp"
#include "promptga/judgment.hpp"
#include "promptga/judgment_log.hpp"
#include "promptga/quality.hpp"
#include "promptga/random.hpp"
#include "promptga/ranking.hpp"
#include "promptga/scheduler.hpp"
#include "promptga/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace promptga {

/// Everything loaded from disk at startup; immutable afterwards.
struct RunInputs {
  KeywordCatalog catalog;
  std::vector<DescriptionSpec> descriptions;
  std::optional<UtilityModel> utility_model;  // simulate mode only

  const DescriptionSpec& description(std::int64_t id) const;
  std::vector<std::int64_t> description_ids(Split split) const;
};

/// Loads catalog, descriptions and (in simulate mode) the utility model.
RunInputs load_inputs(const RunConfig& config);

struct TaskRecord {
  ComparisonTask task;
  PageId page_id = 0;
  int generation = 0;
  /// Log sequence number of the judgment; empty while open.
  std::optional<std::uint64_t> judged_at;
  Side choice = Side::left;
  std::string worker_id;

  bool judged() const noexcept { return judged_at.has_value(); }
  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

struct PageRecord {
  PageId page_id = 0;
  int generation = 0;
  std::vector<TaskId> tasks;
  std::size_t open_tasks = 0;
  friend bool operator==(const PageRecord&, const PageRecord&) = default;
};

/// Per-worker bookkeeping for page timing.
struct WorkerClock {
  std::int64_t last_submitted_at = 0;
  PageId current_page = -1;
  /// Time the worker's current page started: their previous submission.
  std::optional<std::int64_t> page_started_at;
  friend bool operator==(const WorkerClock&, const WorkerClock&) = default;
};

struct GenerationRecord {
  int generation = 0;
  CandidateId added = 0;
  CandidateId best = 0;
  double best_average_rank = 0;
  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

/// Complete optimisation state. Every field is a deterministic function of
/// the config and the judgment log prefix applied so far.
struct RunState {
  int generation = 0;
  std::vector<EvaluatedCandidate> candidates;  // candidate id == position
  /// Per description; rows/cols indexed by candidate id.
  std::map<std::int64_t, OutcomeMatrix<double>> outcomes;
  std::vector<TaskRecord> tasks;  // task id == position
  std::vector<PageRecord> pages;  // page id == position
  BudgetLedger ledger;
  WorkerLedger workers;
  std::map<std::string, WorkerClock> clocks;
  std::vector<JudgmentEvent> log;
  std::vector<GenerationRecord> history;
  IdCounters ids;
  Rng schedule_rng;
  Rng ga_rng;
  bool terminal = false;
  std::string terminal_reason;

  std::size_t open_tasks() const noexcept;
  bool all_judged() const noexcept { return open_tasks() == 0; }
  std::uint64_t log_offset() const noexcept { return log.size(); }
  std::vector<CandidateId> candidate_ids() const;
};

bool operator==(const RunState& a, const RunState& b);

/// Per-description rank lists and leaderboards computed from the current
/// outcome matrices. Descriptions without any judgment are skipped.
struct Aggregation {
  std::vector<RankList> train;
  std::vector<RankList> validation;
  std::vector<LeaderboardEntry> train_board;
  std::vector<LeaderboardEntry> validation_board;
};

/// What an annotator sees: never set ids, masks or golden flags.
struct TaskView {
  TaskId task_id = 0;
  PageId page_id = 0;
  std::string description;
  std::vector<std::string> left_assets;
  std::vector<std::string> right_assets;
};

nlohmann::json to_json(const TaskView& view);

/// The run state machine. Single writer: callers serialise access.
class Run {
 public:
  Run(RunConfig config, RunInputs inputs);

  const RunConfig& config() const noexcept { return config_; }
  const RunInputs& inputs() const noexcept { return inputs_; }
  const RunState& state() const noexcept { return state_; }

  /// Durable logging of every accepted judgment from now on.
  void attach_log(const std::filesystem::path& path);
  /// In strict mode submissions must target a page leased to the worker.
  void set_require_lease(bool on) noexcept { require_lease_ = on; }

  /// Next task for the worker: continues its leased page or leases a new one.
  /// Throws AccessError for inactive workers; empty when nothing is open.
  std::optional<ComparisonTask> next_task(const std::string& worker_id);
  TaskView view_of(const ComparisonTask& task) const;

  /// Validates, logs and applies one judgment. Throws NotFoundError,
  /// ConflictError, AccessError or ValidationError.
  void submit_judgment(const JudgmentEvent& event);

  /// Aggregates, breeds the next candidate and schedules its comparisons.
  /// Returns false without changes when the run is terminal or out of
  /// iterations (setting the terminal flag). Throws NotReadyError while
  /// tasks are open.
  bool step();

  Aggregation aggregate() const;
  /// The candidate step() would produce now, without consuming randomness.
  std::optional<KeywordMask> preview_next_candidate() const;

  /// Opaque asset references for a (description, set) rendering.
  std::vector<std::string> asset_names(std::int64_t description_id, CandidateId set_id) const;
  const KeywordMask& mask_of(CandidateId set_id) const;
  std::string prompt_of(std::int64_t description_id, CandidateId set_id) const;

  /// Applies a logged event without lease checks. Used by replay.
  void apply_logged(const JudgmentEvent& event);

  /// Raises the iteration limit, lifting an "iterations exhausted" stop.
  void extend_iterations(int total);

 private:
  void schedule(std::vector<ComparisonTask> tasks);
  void apply(const JudgmentEvent& event);
  void validate_event(const JudgmentEvent& event) const;
  void release_leases_of(const std::string& worker_id);
  void update_average_ranks(const Aggregation& agg);

  RunConfig config_;
  RunInputs inputs_;
  RunState state_;
  /// page id -> worker holding it. Leases are not part of RunState.
  std::map<PageId, std::string> leases_;
  std::unique_ptr<JudgmentLog> log_writer_;
  bool require_lease_ = false;

  friend Run init_run(const RunConfig& config);
};

/// Loads inputs, seeds the two initial candidates (empty mask and the most
/// popular keywords) and schedules total_budget(2, k) pairs per description.
Run init_run(const RunConfig& config);

/// Rebuilds a run from its judgment log. Steps are replayed whenever the log
/// references a task of the next generation. Throws ReplayError naming the
/// failing offset.
Run replay(const std::filesystem::path& log_path, const RunConfig& config);
Run replay(std::span<const JudgmentEvent> events, const RunConfig& config);

}  // namespace promptga
