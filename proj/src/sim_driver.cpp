#include "promptga/sim_driver.hpp"

#include "promptga/errors.hpp"

#include <cmath>

namespace promptga {

namespace {

constexpr std::uint64_t kSpammerStream = 0x5a;
constexpr std::uint64_t kQualifyStream = 0x9a;
constexpr std::uint64_t kPickStream = 0x71c4;
constexpr std::uint64_t kJudgeStream = 0x1d9e;
constexpr std::uint64_t kTimeStream = 0x7133;
constexpr std::uint64_t kRenderStream = 0x8e4d;
constexpr std::int64_t kEpochMs = 1'700'000'000'000;
constexpr std::size_t kMaxRecruits = 1'000'000;

std::string worker_name(std::size_t index) { return "sim-" + std::to_string(index); }

}  // namespace

SimulatedCrowd::SimulatedCrowd(const RunConfig& config, const UtilityModel& model)
    : config_(config), model_(model) {}

SimWorker SimulatedCrowd::worker(std::size_t index) const {
  auto rng = derive_rng(config_.seed, {kSpammerStream, index});
  return SimWorker{worker_name(index), config_.sim.beta, uniform01(rng) < config_.sim.spammer_fraction};
}

const RenderedSet& SimulatedCrowd::rendering(const Run& run, std::int64_t description_id, CandidateId set_id) {
  const auto key = std::make_pair(description_id, set_id);
  auto it = renders_.find(key);
  if (it == renders_.end()) {
    auto rng = derive_rng(config_.seed, {kRenderStream, static_cast<std::uint64_t>(description_id),
                                         static_cast<std::uint64_t>(set_id)});
    it = renders_.emplace(key, render(description_id, set_id, run.mask_of(set_id), model_, rng)).first;
  }
  return it->second;
}

bool SimulatedCrowd::passes_qualification(std::size_t index, const Run& run) const {
  const auto w = worker(index);
  const auto& candidates = run.state().candidates;
  const auto& descriptions = run.inputs().descriptions;
  auto rng = derive_rng(config_.seed, {kQualifyStream, index});
  for (std::size_t item = 0; item < kQualificationItems; ++item) {
    const auto d = descriptions[item % descriptions.size()].id;
    const auto real = candidates[item % candidates.size()].id;
    const auto& mask = run.mask_of(real);
    const auto genuine = render(d, real, mask, model_, rng);
    const auto weak = render(d, distractor_of(real), mask, model_, rng);
    const bool real_left = uniform_int(rng, 0, 1) == 0;
    const auto choice = real_left ? sim_judge(w, genuine, weak, rng) : sim_judge(w, weak, genuine, rng);
    if (choice != (real_left ? Side::left : Side::right)) return false;
  }
  return true;
}

std::vector<std::size_t> SimulatedCrowd::active_pool(const Run& run) const {
  std::vector<std::size_t> pool;
  const auto& workers = run.state().workers;
  for (std::size_t i = 0; i < kMaxRecruits && pool.size() < static_cast<std::size_t>(config_.sim.workers); ++i) {
    const auto it = workers.find(worker_name(i));
    if (it != workers.end() && !it->second.active()) continue;
    if (it == workers.end() && !passes_qualification(i, run)) continue;
    pool.push_back(i);
  }
  if (pool.empty()) throw StateError("no simulated worker could be recruited");
  return pool;
}

std::size_t SimulatedCrowd::judge_open_tasks(Run& run) {
  std::size_t submitted = 0;
  while (!run.state().all_judged()) {
    const auto pool = active_pool(run);
    auto pick = derive_rng(config_.seed, {kPickStream, run.state().log_offset()});
    const auto index = pool[uniform_int<std::size_t>(pick, 0, pool.size() - 1)];
    const auto w = worker(index);

    while (true) {
      const auto task = run.next_task(w.worker_id);
      if (!task) return submitted;
      const auto& left = rendering(run, task->description_id, task->left_set);
      const auto& right = rendering(run, task->description_id, task->right_set);
      auto judge_rng = derive_rng(config_.seed, {kJudgeStream, index, static_cast<std::uint64_t>(task->task_id)});
      const auto choice = sim_judge(w, left, right, judge_rng);

      auto time_rng = derive_rng(config_.seed, {kTimeStream, index, static_cast<std::uint64_t>(task->task_id)});
      const double seconds = w.spammer ? std::uniform_real_distribution<double>(config_.sim.spammer_seconds_min,
                                                                                config_.sim.spammer_seconds_max)(time_rng)
                                       : std::uniform_real_distribution<double>(config_.sim.honest_seconds_min,
                                                                                config_.sim.honest_seconds_max)(time_rng);
      const auto& clocks = run.state().clocks;
      const auto clock = clocks.find(w.worker_id);
      const std::int64_t previous =
          clock != clocks.end() ? clock->second.last_submitted_at : kEpochMs + static_cast<std::int64_t>(index) * 1000;

      JudgmentEvent event;
      event.task_id = task->task_id;
      event.worker_id = w.worker_id;
      event.choice = choice;
      event.submitted_at = previous + std::llround(seconds * 1000.0);
      event.page_id = run.state().tasks[static_cast<std::size_t>(task->task_id)].page_id;
      run.submit_judgment(event);
      ++submitted;

      if (!run.state().workers.at(w.worker_id).active()) break;
      if (run.state().pages[static_cast<std::size_t>(event.page_id)].open_tasks == 0) break;
    }
  }
  return submitted;
}

int simulate(Run& run, std::optional<int> until_generation) {
  if (!run.inputs().utility_model) throw ConfigError("simulation needs a utility model");
  SimulatedCrowd crowd(run.config(), *run.inputs().utility_model);
  int steps = 0;
  while (true) {
    crowd.judge_open_tasks(run);
    if (until_generation && run.state().generation >= *until_generation) break;
    if (!run.step()) break;
    ++steps;
  }
  return steps;
}

}  // namespace promptga
