#include "promptga/errors.hpp"
#include "promptga/orchestrator.hpp"
#include "promptga/sim_driver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace promptga;
using promptga::testing::TempDir;

namespace {

std::size_t non_golden_tasks(const RunState& s, std::int64_t d) {
  std::size_t n = 0;
  for (const auto& t : s.tasks) n += !t.task.is_golden && t.task.description_id == d;
  return n;
}

/// Judges every open task as `worker`, 20 s apart, answering goldens
/// correctly and preferring the higher candidate id otherwise.
void judge_all(Run& run, const std::string& worker, std::int64_t& clock) {
  while (auto task = run.next_task(worker)) {
    const auto& rec = run.state().tasks[static_cast<std::size_t>(task->task_id)];
    const Side choice = task->is_golden ? *task->golden_answer
                                        : (task->left_set > task->right_set ? Side::left : Side::right);
    clock += 20'000;
    run.submit_judgment({task->task_id, worker, choice, clock, rec.page_id});
  }
}

struct Fixture : ::testing::Test {
  TempDir dir;
  RunConfig config = promptga::testing::small_run(dir);
};

}  // namespace

using Init = Fixture;

TEST_F(Init, SeedsTwoCandidatesAndSixTasksPerDescription) {
  const auto run = init_run(config);
  const auto& s = run.state();
  ASSERT_EQ(s.candidates.size(), 2u);
  EXPECT_EQ(s.candidates[0].mask, KeywordMask::zeros(8));
  EXPECT_EQ(s.candidates[1].mask, top_k_mask(run.inputs().catalog, 3));
  EXPECT_EQ(s.generation, 0);
  for (const auto& d : run.inputs().descriptions) {
    EXPECT_EQ(non_golden_tasks(s, d.id), 6u);
    EXPECT_EQ(s.ledger.at(d.id).pairs_issued, 6);
    EXPECT_EQ(s.outcomes.at(d.id).rows(), 2);
  }
  EXPECT_TRUE(s.log.empty());
  // 24 tasks -> 5 pages, one golden among them.
  EXPECT_EQ(s.pages.size(), 5u);
  EXPECT_EQ(s.tasks.size(), 25u);
}

TEST(InitPaperShape, ThreeHundredSixtyTrainingTasks) {
  RunConfig c;
  c.catalog_path = std::filesystem::path(PROMPTGA_DATA_DIR) / "keywords.tsv";
  c.descriptions_path = std::filesystem::path(PROMPTGA_DATA_DIR) / "descriptions.tsv";
  c.mode = RunMode::serve;
  const auto run = init_run(c);
  ASSERT_EQ(run.state().candidates.size(), 2u);
  EXPECT_EQ(run.state().candidates[1].mask.popcount(), 15u);
  std::size_t train = 0;
  for (auto d : run.inputs().description_ids(Split::train)) {
    EXPECT_EQ(non_golden_tasks(run.state(), d), 6u);
    train += non_golden_tasks(run.state(), d);
  }
  EXPECT_EQ(train, 360u);
}

TEST_F(Init, StartupErrors) {
  auto missing = config;
  missing.catalog_path = dir / "nope.tsv";
  EXPECT_THROW(init_run(missing), Error);
  promptga::testing::write_file(dir / "empty.tsv", "");
  auto empty = config;
  empty.descriptions_path = dir / "empty.tsv";
  EXPECT_THROW(init_run(empty), ConfigError);
  auto bad = config;
  bad.k = 0;
  EXPECT_THROW(init_run(bad), ConfigError);
  auto wrong_model = config;
  save_utility_model(default_synthetic_model(5), dir / "m5.json");
  wrong_model.utility_model_path = dir / "m5.json";
  EXPECT_THROW(init_run(wrong_model), ConfigError);
  auto no_top = config;
  no_top.init_top_k = 0;
  EXPECT_THROW(init_run(no_top), ConfigError);
}

TEST_F(Init, ZeroIterationsRefusesToEvolve) {
  config.iterations = 0;
  auto run = init_run(config);
  std::int64_t clock = 0;
  judge_all(run, "w", clock);
  EXPECT_FALSE(run.step());
  EXPECT_TRUE(run.state().terminal);
  EXPECT_EQ(run.state().terminal_reason, "iterations exhausted");
  EXPECT_EQ(run.state().candidates.size(), 2u);
  EXPECT_FALSE(run.step());
}

using Step = Fixture;

TEST_F(Step, NotReadyWhileTasksAreOpen) {
  auto run = init_run(config);
  EXPECT_THROW(run.step(), NotReadyError);
}

TEST_F(Step, FirstStepAddsNineTasksPerDescription) {
  auto run = init_run(config);
  std::int64_t clock = 0;
  judge_all(run, "w", clock);
  ASSERT_TRUE(run.step());
  const auto& s = run.state();
  EXPECT_EQ(s.generation, 1);
  ASSERT_EQ(s.candidates.size(), 3u);
  EXPECT_EQ(s.candidates[2].generation, 1);
  EXPECT_TRUE(s.candidates[0].average_rank.has_value());
  for (const auto& d : run.inputs().descriptions) {
    EXPECT_EQ(non_golden_tasks(s, d.id), 6u + 9u);
    EXPECT_EQ(s.outcomes.at(d.id).rows(), 3);
  }
  for (const auto& t : s.tasks)
    if (t.generation == 1 && !t.task.is_golden) EXPECT_TRUE(t.task.left_set == 2 || t.task.right_set == 2);
}

TEST_F(Step, FullRunConservesJudgments) {
  config.iterations = 6;
  auto run = init_run(config);
  std::int64_t clock = 0;
  do judge_all(run, "w", clock);
  while (run.step());
  const auto& s = run.state();
  EXPECT_TRUE(s.terminal);
  EXPECT_EQ(s.candidates.size(), 6u + 2u);
  EXPECT_EQ(s.history.size(), 6u);
  const auto n = static_cast<Eigen::Index>(s.candidates.size());
  for (const auto& [d, wins] : s.outcomes) {
    EXPECT_EQ(static_cast<std::int64_t>(wins.sum()), s.ledger.at(d).pairs_issued);
    EXPECT_EQ(static_cast<std::int64_t>(non_golden_tasks(s, d)), s.ledger.at(d).pairs_issued);
    EXPECT_TRUE(s.ledger.within_telescoping_bound(d));
    for (Eigen::Index c = 0; c < n; ++c) EXPECT_GT(wins.row(c).sum() + wins.col(c).sum(), 0) << "candidate " << c;
  }
  for (const auto& e : s.log) EXPECT_LT(static_cast<std::size_t>(e.task_id), s.tasks.size());
}

TEST_F(Step, AssignmentsPerTaskReplicates) {
  config.assignments_per_task = 2;
  const auto run = init_run(config);
  for (const auto& d : run.inputs().descriptions) EXPECT_EQ(non_golden_tasks(run.state(), d.id), 12u);
}

TEST_F(Step, ExtendIterationsLiftsTheStop) {
  config.iterations = 1;
  auto run = init_run(config);
  std::int64_t clock = 0;
  do judge_all(run, "w", clock);
  while (run.step());
  EXPECT_EQ(run.state().terminal_reason, "iterations exhausted");
  run.extend_iterations(2);
  EXPECT_FALSE(run.state().terminal);
  EXPECT_TRUE(run.step());
  EXPECT_EQ(run.state().candidates.size(), 4u);
}

using Tasks = Fixture;

TEST_F(Tasks, FreshRunServesGenerationZero) {
  auto run = init_run(config);
  const auto t = run.next_task("a");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(run.state().tasks[static_cast<std::size_t>(t->task_id)].generation, 0);
  // Until the page is done the same worker keeps getting tasks from it.
  EXPECT_EQ(run.next_task("a")->task_id, t->task_id);
  const auto other = run.next_task("b");
  ASSERT_TRUE(other.has_value());
  EXPECT_NE(run.state().tasks[static_cast<std::size_t>(other->task_id)].page_id,
            run.state().tasks[static_cast<std::size_t>(t->task_id)].page_id);
}

TEST_F(Tasks, ViewHidesSetsAndGoldenFlags) {
  auto run = init_run(config);
  const auto t = run.next_task("a");
  const auto j = to_json(run.view_of(*t));
  EXPECT_EQ(j.size(), 5u);
  for (const char* hidden : {"left_set", "right_set", "is_golden", "golden_answer", "mask", "keywords"})
    EXPECT_FALSE(j.contains(hidden)) << hidden;
  EXPECT_EQ(j.at("left").size(), 4u);
  EXPECT_EQ(j.at("right").size(), 4u);
  EXPECT_EQ(j.at("description"), run.inputs().description(t->description_id).text);
}

TEST_F(Tasks, EmptyQueueWhenEverythingIsJudged) {
  auto run = init_run(config);
  std::int64_t clock = 0;
  judge_all(run, "w", clock);
  EXPECT_FALSE(run.next_task("w").has_value());
  EXPECT_FALSE(run.next_task("x").has_value());
}

TEST_F(Tasks, SubmitValidation) {
  TempDir logdir;
  auto run = init_run(config);
  run.attach_log(logdir / "log.jsonl");
  run.set_require_lease(true);
  const auto t = *run.next_task("a");
  const auto page = run.state().tasks[static_cast<std::size_t>(t.task_id)].page_id;
  const JudgmentEvent e{t.task_id, "a", Side::left, 1000, page};
  EXPECT_THROW(run.submit_judgment({9999, "a", Side::left, 1000, page}), NotFoundError);
  EXPECT_THROW(run.submit_judgment({t.task_id, "a", Side::left, 1000, page + 1}), ValidationError);
  EXPECT_THROW(run.submit_judgment({t.task_id, "b", Side::left, 1000, page}), AccessError);
  run.submit_judgment(e);
  EXPECT_EQ(run.state().log.size(), 1u);
  EXPECT_EQ(read_judgment_log(logdir / "log.jsonl").size(), 1u);
  EXPECT_THROW(run.submit_judgment(e), ConflictError);
  const auto next = *run.next_task("a");
  EXPECT_THROW(run.submit_judgment({next.task_id, "a", Side::left, 999, page}), ValidationError);
  EXPECT_EQ(read_judgment_log(logdir / "log.jsonl").size(), 1u);
}

TEST_F(Tasks, WrongGoldenDisqualifiesUnderOneMistake) {
  config.pages_per_golden = 1;
  auto run = init_run(config);
  std::int64_t clock = 0;
  bool failed = false;
  while (!failed) {
    const auto t = *run.next_task("a");
    const auto page = run.state().tasks[static_cast<std::size_t>(t.task_id)].page_id;
    const Side choice = t.is_golden ? opposite(*t.golden_answer) : Side::left;
    clock += 20'000;
    run.submit_judgment({t.task_id, "a", choice, clock, page});
    failed = t.is_golden;
  }
  const auto& w = run.state().workers.at("a");
  EXPECT_EQ(w.status, WorkerStatus::disqualified);
  EXPECT_EQ(w.deactivated_at, run.state().log.size() - 1);
  EXPECT_THROW(run.next_task("a"), AccessError);
  // The page it held is released to others.
  EXPECT_TRUE(run.next_task("b").has_value());
}

TEST_F(Tasks, FastPagesSuspendButTheFirstPageIsNotTimed) {
  auto run = init_run(config);
  std::int64_t clock = 0;
  const auto finish_page = [&](std::int64_t step_ms) {
    const auto first = *run.next_task("a");
    const auto page = run.state().tasks[static_cast<std::size_t>(first.task_id)].page_id;
    while (auto t = run.next_task("a")) {
      if (run.state().tasks[static_cast<std::size_t>(t->task_id)].page_id != page) break;
      clock += step_ms;
      run.submit_judgment({t->task_id, "a", t->is_golden ? *t->golden_answer : Side::left, clock, page});
      if (run.state().pages[static_cast<std::size_t>(page)].open_tasks == 0) break;
    }
  };
  finish_page(1000);  // first page: no reference point, so no timing
  EXPECT_TRUE(run.state().workers.at("a").active());
  EXPECT_TRUE(run.state().workers.at("a").page_timings.empty());
  finish_page(1000);  // 5 s for a page
  EXPECT_EQ(run.state().workers.at("a").status, WorkerStatus::suspended);
  ASSERT_EQ(run.state().workers.at("a").page_timings.size(), 1u);
  EXPECT_LT(run.state().workers.at("a").page_timings[0].second, 15.0);
}

using Replay = Fixture;

TEST_F(Replay, EmptyLogEqualsInit) {
  const auto live = init_run(config);
  const auto replayed = replay(std::vector<JudgmentEvent>{}, config);
  EXPECT_TRUE(live.state() == replayed.state());
}

TEST_F(Replay, SimulatedRunReplaysBitIdentically) {
  config.sim.spammer_fraction = 0.3;
  auto live = init_run(config);
  live.attach_log(dir / "log.jsonl");
  simulate(live);
  ASSERT_TRUE(live.state().terminal);
  const auto replayed = replay(dir / "log.jsonl", config);
  EXPECT_TRUE(live.state() == replayed.state());
  EXPECT_EQ(live.aggregate().train_board, replayed.aggregate().train_board);
  EXPECT_EQ(live.aggregate().validation_board, replayed.aggregate().validation_board);
  auto extended = live.config();
  extended.iterations += 1;
  const auto a = replay(live.state().log, extended);
  EXPECT_EQ(a.preview_next_candidate(), live.preview_next_candidate());
}

TEST_F(Replay, MidGenerationPrefix) {
  auto live = init_run(config);
  simulate(live, 1);
  ASSERT_TRUE(live.step());
  std::int64_t clock = live.state().clocks.begin()->second.last_submitted_at;
  // A fresh worker judges part of generation 2.
  for (int i = 0; i < 3; ++i) {
    const auto t = *live.next_task("late");
    clock += 20'000;
    live.submit_judgment({t.task_id, "late", t.is_golden ? *t.golden_answer : Side::right, clock,
                          live.state().tasks[static_cast<std::size_t>(t.task_id)].page_id});
  }
  const auto replayed = replay(live.state().log, config);
  EXPECT_TRUE(live.state() == replayed.state());
  EXPECT_EQ(replayed.state().generation, 2);
}

TEST_F(Replay, EveryPrefixReplays) {
  auto live = init_run(config);
  simulate(live, 1);
  const auto& log = live.state().log;
  for (std::size_t m = 0; m <= log.size(); m += 7) {
    const auto prefix = std::span(log).first(m);
    const auto r = replay(prefix, config);
    EXPECT_EQ(r.state().log.size(), m);
  }
}

TEST_F(Replay, BadEventNamesItsOffset) {
  auto live = init_run(config);
  simulate(live, 1);
  auto log = live.state().log;
  log.insert(log.begin() + 4, log[2]);  // duplicate judgment
  try {
    replay(log, config);
    FAIL();
  } catch (const ReplayError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 4"), std::string::npos) << e.what();
  }
}

TEST_F(Replay, SimulationIsAPureFunctionOfConfigAndSeed) {
  auto a = init_run(config);
  auto b = init_run(config);
  simulate(a);
  simulate(b);
  EXPECT_TRUE(a.state() == b.state());
  config.seed += 1;
  auto c = init_run(config);
  simulate(c);
  EXPECT_FALSE(a.state() == c.state());
}

TEST_F(Replay, ResumedSimulationMatchesUninterrupted) {
  auto whole = init_run(config);
  simulate(whole);
  auto part = init_run(config);
  simulate(part, 2);
  auto resumed = replay(part.state().log, config);
  simulate(resumed);
  EXPECT_TRUE(whole.state() == resumed.state());
}
