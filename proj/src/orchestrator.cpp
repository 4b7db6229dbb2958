#include "promptga/orchestrator.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace promptga {

const DescriptionSpec& RunInputs::description(std::int64_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= descriptions.size())
    throw NotFoundError("unknown description " + std::to_string(id));
  return descriptions[static_cast<std::size_t>(id)];
}

std::vector<std::int64_t> RunInputs::description_ids(Split split) const {
  std::vector<std::int64_t> out;
  for (const auto& d : descriptions)
    if (d.split == split) out.push_back(d.id);
  return out;
}

RunInputs load_inputs(const RunConfig& config) {
  RunInputs inputs;
  inputs.catalog = load_catalog(config.catalog_path);
  inputs.descriptions = load_descriptions(config.descriptions_path);
  if (inputs.descriptions.empty()) throw ConfigError("descriptions file is empty: nothing to evaluate");
  if (inputs.description_ids(Split::train).empty()) throw ConfigError("no training descriptions");
  if (config.mode == RunMode::simulate) {
    inputs.utility_model = config.utility_model_path.empty()
                               ? default_synthetic_model(inputs.catalog.size())
                               : load_utility_model(config.utility_model_path);
    if (inputs.utility_model->size() != inputs.catalog.size())
      throw ConfigError("utility model has " + std::to_string(inputs.utility_model->size()) +
                        " weights but the catalog has " + std::to_string(inputs.catalog.size()) + " keywords");
  }
  return inputs;
}

std::size_t RunState::open_tasks() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(tasks.begin(), tasks.end(), [](const TaskRecord& t) { return !t.judged(); }));
}

std::vector<CandidateId> RunState::candidate_ids() const {
  std::vector<CandidateId> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.id);
  return ids;
}

bool operator==(const RunState& a, const RunState& b) {
  if (a.outcomes.size() != b.outcomes.size()) return false;
  for (auto ia = a.outcomes.begin(), ib = b.outcomes.begin(); ia != a.outcomes.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.rows() != ib->second.rows() || ia->second.cols() != ib->second.cols() ||
        ia->second != ib->second)
      return false;
  }
  const auto same_candidates = std::equal(
      a.candidates.begin(), a.candidates.end(), b.candidates.begin(), b.candidates.end(),
      [](const EvaluatedCandidate& x, const EvaluatedCandidate& y) {
        return x.id == y.id && x.mask == y.mask && x.generation == y.generation && x.average_rank == y.average_rank;
      });
  return same_candidates && a.generation == b.generation && a.tasks == b.tasks && a.pages == b.pages &&
         a.ledger == b.ledger && a.workers == b.workers && a.clocks == b.clocks && a.log == b.log &&
         a.history == b.history && a.ids.next_task == b.ids.next_task && a.ids.next_page == b.ids.next_page &&
         a.schedule_rng == b.schedule_rng && a.ga_rng == b.ga_rng && a.terminal == b.terminal &&
         a.terminal_reason == b.terminal_reason;
}

nlohmann::json to_json(const TaskView& view) {
  return {{"task_id", view.task_id},
          {"page_id", view.page_id},
          {"description", view.description},
          {"left", view.left_assets},
          {"right", view.right_assets}};
}

Run::Run(RunConfig config, RunInputs inputs)
    : config_(std::move(config)), inputs_(std::move(inputs)) {
  config_.validate();
  state_.ledger = BudgetLedger(config_.k);
  state_.schedule_rng = derive_rng(config_.seed, {1});
  state_.ga_rng = derive_rng(config_.seed, {2});
}

void Run::attach_log(const std::filesystem::path& path) { log_writer_ = std::make_unique<JudgmentLog>(path); }

void Run::schedule(std::vector<ComparisonTask> tasks) {
  std::shuffle(tasks.begin(), tasks.end(), state_.schedule_rng);
  std::vector<ComparisonTask> expanded;
  expanded.reserve(tasks.size() * static_cast<std::size_t>(config_.assignments_per_task));
  for (const auto& t : tasks)
    for (int a = 0; a < config_.assignments_per_task; ++a) {
      expanded.push_back(t);
      expanded.back().task_id = state_.ids.take_task();
    }
  GoldenSource source{state_.candidate_ids()};
  auto pages = inject_golden(expanded, config_.page_size, config_.pages_per_golden, source, state_.schedule_rng,
                             state_.ids);
  state_.tasks.resize(static_cast<std::size_t>(state_.ids.next_task));
  for (auto& page : pages) {
    PageRecord record{page.page_id, state_.generation, {}, page.tasks.size()};
    for (auto& t : page.tasks) {
      record.tasks.push_back(t.task_id);
      auto& slot = state_.tasks[static_cast<std::size_t>(t.task_id)];
      slot = TaskRecord{};
      slot.task = t;
      slot.page_id = page.page_id;
      slot.generation = state_.generation;
    }
    if (static_cast<std::size_t>(page.page_id) != state_.pages.size())
      throw StateError("page ids out of sequence");
    state_.pages.push_back(std::move(record));
  }
}

Run init_run(const RunConfig& config) {
  config.validate();
  Run run(config, load_inputs(config));
  auto& state = run.state_;
  const auto& catalog = run.inputs_.catalog;
  const auto top = std::min(config.init_top_k.value_or(config.cardinality_cap), catalog.size());
  state.candidates.push_back({0, KeywordMask::zeros(catalog.size()), 0, std::nullopt});
  state.candidates.push_back({1, top_k_mask(catalog, top), 0, std::nullopt});
  if (state.candidates[0].mask == state.candidates[1].mask)
    throw ConfigError("initial masks coincide: the popular-keyword mask is empty");

  const std::vector<CandidateId> initial{0, 1};
  std::vector<ComparisonTask> tasks;
  IdCounters scratch;
  for (const auto& d : run.inputs_.descriptions) {
    auto pairs = sample_initial_pairs(d.id, initial, config.k, state.schedule_rng, scratch);
    state.ledger.record(d.id, 2, static_cast<std::int64_t>(pairs.size()));
    state.outcomes[d.id] = OutcomeMatrix<double>::Zero(2, 2);
    tasks.insert(tasks.end(), pairs.begin(), pairs.end());
  }
  run.schedule(std::move(tasks));
  return run;
}

std::optional<ComparisonTask> Run::next_task(const std::string& worker_id) {
  if (worker_id.empty()) throw ValidationError("worker id is empty");
  const auto w = state_.workers.find(worker_id);
  if (w != state_.workers.end() && !w->second.active())
    throw AccessError("worker " + worker_id + " is " + std::string(to_string(w->second.status)));

  std::optional<PageId> page;
  for (const auto& [p, holder] : leases_)
    if (holder == worker_id) page = p;
  if (!page) {
    for (const auto& rec : state_.pages) {
      if (rec.open_tasks > 0 && !leases_.contains(rec.page_id)) {
        page = rec.page_id;
        leases_[rec.page_id] = worker_id;
        break;
      }
    }
  }
  if (!page) return std::nullopt;
  for (auto id : state_.pages[static_cast<std::size_t>(*page)].tasks) {
    const auto& rec = state_.tasks[static_cast<std::size_t>(id)];
    if (!rec.judged()) return rec.task;
  }
  throw StateError("leased page has no open task");
}

const KeywordMask& Run::mask_of(CandidateId set_id) const {
  const auto real = is_distractor(set_id) ? real_of_distractor(set_id) : set_id;
  if (real < 0 || static_cast<std::size_t>(real) >= state_.candidates.size())
    throw NotFoundError("unknown keyword set " + std::to_string(set_id));
  return state_.candidates[static_cast<std::size_t>(real)].mask;
}

std::string Run::prompt_of(std::int64_t description_id, CandidateId set_id) const {
  return build_prompt(inputs_.description(description_id), mask_of(set_id), inputs_.catalog);
}

std::vector<std::string> Run::asset_names(std::int64_t description_id, CandidateId set_id) const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kAssetsPerSet; ++i) {
    const auto h = derive_seed(config_.seed, {0xa55e7ULL, static_cast<std::uint64_t>(description_id),
                                              static_cast<std::uint64_t>(set_id), i});
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    names.emplace_back(buf);
  }
  return names;
}

TaskView Run::view_of(const ComparisonTask& task) const {
  TaskView v;
  v.task_id = task.task_id;
  v.page_id = state_.tasks.at(static_cast<std::size_t>(task.task_id)).page_id;
  v.description = inputs_.description(task.description_id).text;
  v.left_assets = asset_names(task.description_id, task.left_set);
  v.right_assets = asset_names(task.description_id, task.right_set);
  return v;
}

void Run::validate_event(const JudgmentEvent& e) const {
  if (e.task_id < 0 || static_cast<std::size_t>(e.task_id) >= state_.tasks.size())
    throw NotFoundError("unknown task " + std::to_string(e.task_id));
  const auto& rec = state_.tasks[static_cast<std::size_t>(e.task_id)];
  if (rec.judged()) throw ConflictError("task " + std::to_string(e.task_id) + " has already been judged");
  if (rec.page_id != e.page_id)
    throw ValidationError("task " + std::to_string(e.task_id) + " is on page " + std::to_string(rec.page_id) +
                          ", not " + std::to_string(e.page_id));
  if (e.worker_id.empty()) throw ValidationError("worker id is empty");
  const auto w = state_.workers.find(e.worker_id);
  if (w != state_.workers.end() && !w->second.active())
    throw AccessError("worker " + e.worker_id + " is " + std::string(to_string(w->second.status)));
  const auto c = state_.clocks.find(e.worker_id);
  if (c != state_.clocks.end() && e.submitted_at < c->second.last_submitted_at)
    throw ValidationError("judgment from " + e.worker_id + " is older than the worker's previous judgment");
}

void Run::submit_judgment(const JudgmentEvent& event) {
  validate_event(event);
  if (require_lease_) {
    const auto lease = leases_.find(event.page_id);
    if (lease == leases_.end() || lease->second != event.worker_id)
      throw AccessError("task " + std::to_string(event.task_id) + " is not assigned to " + event.worker_id);
  }
  if (log_writer_) log_writer_->append(event);
  apply(event);
}

void Run::apply_logged(const JudgmentEvent& event) {
  validate_event(event);
  apply(event);
}

void Run::release_leases_of(const std::string& worker_id) {
  std::erase_if(leases_, [&](const auto& kv) { return kv.second == worker_id; });
}

void Run::apply(const JudgmentEvent& e) {
  const auto seq = static_cast<std::uint64_t>(state_.log.size());
  state_.log.push_back(e);
  auto& rec = state_.tasks[static_cast<std::size_t>(e.task_id)];
  rec.judged_at = seq;
  rec.choice = e.choice;
  rec.worker_id = e.worker_id;
  auto& page = state_.pages[static_cast<std::size_t>(rec.page_id)];
  --page.open_tasks;

  auto& worker = state_.workers[e.worker_id];
  if (worker.worker_id.empty()) worker.worker_id = e.worker_id;
  auto [clock_it, fresh] = state_.clocks.try_emplace(e.worker_id);
  auto& clock = clock_it->second;
  if (clock.current_page != e.page_id) {
    clock.page_started_at = fresh ? std::nullopt : std::optional<std::int64_t>(clock.last_submitted_at);
    clock.current_page = e.page_id;
  }
  clock.last_submitted_at = e.submitted_at;

  if (rec.task.is_golden) {
    worker = record_golden(std::move(worker), e.choice == rec.task.golden_answer, config_.quality, seq);
  } else {
    const auto winner = rec.task.set_on(e.choice);
    const auto loser = rec.task.set_on(opposite(e.choice));
    state_.outcomes.at(rec.task.description_id)(winner, loser) += 1.0;
  }

  if (page.open_tasks == 0) {
    leases_.erase(page.page_id);
    if (worker.active() && clock.page_started_at) {
      const auto ms = std::max<std::int64_t>(1, e.submitted_at - *clock.page_started_at);
      worker = record_page_time(std::move(worker), page.page_id, static_cast<double>(ms) / 1000.0, config_.quality,
                                seq);
    }
  } else if (worker.active()) {
    leases_[page.page_id] = e.worker_id;
  }
  if (!worker.active()) release_leases_of(e.worker_id);
}

Aggregation Run::aggregate() const {
  Aggregation agg;
  const auto ids = state_.candidate_ids();
  for (const auto& [d, wins] : state_.outcomes) {
    if (wins.sum() <= 0) continue;
    BtFit<double> fit;
    try {
      fit = bt_fit(wins, config_.bt);
    } catch (const DataError&) {
      continue;
    }
    auto ranks = rank_from_scores(fit.scores, ids, d);
    (inputs_.description(d).split == Split::train ? agg.train : agg.validation).push_back(std::move(ranks));
  }
  if (!agg.train.empty()) agg.train_board = leaderboard(agg.train, ids);
  if (!agg.validation.empty()) agg.validation_board = leaderboard(agg.validation, ids);
  return agg;
}

void Run::update_average_ranks(const Aggregation& agg) {
  for (const auto& entry : agg.train_board)
    state_.candidates[static_cast<std::size_t>(entry.id)].average_rank = entry.average_rank;
}

std::optional<KeywordMask> Run::preview_next_candidate() const {
  auto candidates = state_.candidates;
  for (const auto& entry : aggregate().train_board)
    candidates[static_cast<std::size_t>(entry.id)].average_rank = entry.average_rank;
  auto rng = state_.ga_rng;
  try {
    return next_candidate(candidates, config_.cardinality_cap, config_.mutation_probability, rng,
                          config_.max_attempts)
        .mask;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool Run::step() {
  if (state_.terminal) return false;
  if (!state_.all_judged())
    throw NotReadyError(std::to_string(state_.open_tasks()) + " tasks of generation " +
                        std::to_string(state_.generation) + " are still open");
  const auto agg = aggregate();
  update_average_ranks(agg);
  if (state_.generation >= config_.iterations) {
    state_.terminal = true;
    state_.terminal_reason = "iterations exhausted";
    return false;
  }

  GeneratedCandidate child;
  try {
    child = next_candidate(state_.candidates, config_.cardinality_cap, config_.mutation_probability, state_.ga_rng,
                           config_.max_attempts);
  } catch (const SaturationError& e) {
    state_.terminal = true;
    state_.terminal_reason = std::string("genetic algorithm saturated: ") + e.what();
    return false;
  }

  const auto existing = state_.candidate_ids();
  const auto new_id = static_cast<CandidateId>(existing.size());
  state_.candidates.push_back({new_id, std::move(child.mask), state_.generation + 1, std::nullopt});

  std::vector<ComparisonTask> tasks;
  IdCounters scratch;
  const auto n = static_cast<Eigen::Index>(existing.size());
  for (auto& [d, wins] : state_.outcomes) {
    auto pairs = sample_incremental_pairs(d, new_id, existing, config_.k, state_.schedule_rng, scratch);
    state_.ledger.record(d, n + 1, static_cast<std::int64_t>(pairs.size()));
    wins.conservativeResize(n + 1, n + 1);
    wins.row(n).setZero();
    wins.col(n).setZero();
    tasks.insert(tasks.end(), pairs.begin(), pairs.end());
  }
  ++state_.generation;
  schedule(std::move(tasks));

  if (!agg.train_board.empty()) {
    const auto& best = agg.train_board.front();
    state_.history.push_back({state_.generation, new_id, best.id, best.average_rank});
  }
  return true;
}

void Run::extend_iterations(int total) {
  if (total < 0) throw ConfigError("iterations must be >= 0");
  config_.iterations = total;
  if (state_.terminal && state_.terminal_reason == "iterations exhausted" && state_.generation < total) {
    state_.terminal = false;
    state_.terminal_reason.clear();
  }
}

Run replay(std::span<const JudgmentEvent> events, const RunConfig& config) {
  Run run = init_run(config);
  for (std::size_t offset = 0; offset < events.size(); ++offset) {
    const auto& e = events[offset];
    try {
      const bool unseen = e.task_id >= 0 && static_cast<std::size_t>(e.task_id) >= run.state().tasks.size();
      if (unseen && run.state().all_judged() && !run.state().terminal) run.step();
      run.apply_logged(e);
    } catch (const Error& ex) {
      throw ReplayError("replay failed at offset " + std::to_string(offset) + ": " + ex.what());
    }
  }
  if (run.state().all_judged() && run.state().generation >= config.iterations) run.step();
  return run;
}

Run replay(const std::filesystem::path& log_path, const RunConfig& config) {
  const auto events = read_judgment_log(log_path);
  return replay(events, config);
}

}  // namespace promptga
