#include "promptga/config.hpp"
#include "promptga/errors.hpp"
#include "promptga/orchestrator.hpp"
#include "promptga/report.hpp"
#include "promptga/server.hpp"
#include "promptga/sim_driver.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace promptga;

namespace {

constexpr const char* kConfigFile = "run.json";
constexpr const char* kLogFile = "judgments.jsonl";

Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

RunConfig run_dir_config(const fs::path& run_dir) { return load_run_config(run_dir / kConfigFile); }

Run replay_run_dir(const fs::path& run_dir) {
  const auto config = run_dir_config(run_dir);
  const auto log = run_dir / kLogFile;
  return fs::exists(log) ? replay(log, config) : init_run(config);
}

void print_status(const Run& run, std::size_t top, std::ostream& out) {
  const auto& state = run.state();
  out << "generation " << state.generation << ", " << state.candidates.size() << " candidates, "
      << state.log.size() << " judgments, " << state.open_tasks() << " open tasks";
  if (state.terminal) out << ", terminal: " << state.terminal_reason;
  out << '\n';
  const auto board = run.aggregate().train_board;
  for (std::size_t i = 0; i < std::min(top, board.size()); ++i) {
    const auto& mask = run.mask_of(board[i].id);
    out << std::setw(4) << i + 1 << "  candidate " << std::setw(3) << board[i].id << "  average rank "
        << std::fixed << std::setprecision(3) << board[i].average_rank << std::defaultfloat << "  "
        << keyword_line(mask, run.inputs().catalog) << '\n';
  }
}

void write_fresh_run_dir(const RunConfig& config, const fs::path& run_dir, bool force) {
  fs::create_directories(run_dir);
  const auto log = run_dir / kLogFile;
  if (fs::exists(log) && fs::file_size(log) > 0 && !force)
    throw ConfigError(log.string() + " already holds judgments; pass --force to discard them");
  init_run(config);  // fail before touching the directory when inputs are bad
  save_run_config(config, run_dir / kConfigFile);
  std::ofstream(log, std::ios::trunc);
}

int run_simulation(Run& run, const fs::path& run_dir) {
  if (run.config().mode != RunMode::simulate)
    throw ConfigError("run only drives simulate-mode runs; use serve for human annotation");
  run.attach_log(run_dir / kLogFile);
  const int steps = simulate(run);
  std::cout << "advanced " << steps << " generations\n";
  print_status(run, 5, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword-set search for text-to-image prompts with crowd-sourced pairwise comparisons"};
  app.require_subcommand(1);
  fs::path run_dir = ".";
  app.add_option("--run-dir", run_dir, "Directory holding run.json and judgments.jsonl")->capture_default_str();

  auto* init = app.add_subcommand("init", "Create a run directory from a config file");
  fs::path init_config;
  bool init_force = false;
  init->add_option("--config", init_config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  init->add_flag("--force", init_force, "Discard an existing judgment log");

  auto* run_cmd = app.add_subcommand("run", "Resume a simulate-mode run up to N iterations");
  int iterations = 0;
  run_cmd->add_option("--iterations", iterations, "Total iterations")->required()->check(CLI::NonNegativeNumber);

  auto* sim = app.add_subcommand("simulate", "Start a fresh simulated run and drive it to completion");
  std::uint64_t sim_seed = 0;
  fs::path sim_config;
  bool sim_force = false;
  sim->add_option("--seed", sim_seed, "Run seed")->required();
  sim->add_option("--config", sim_config, "Run config (default: run.json in the run directory)")
      ->check(CLI::ExistingFile);
  sim->add_flag("--force", sim_force, "Discard an existing judgment log");

  auto* serve = app.add_subcommand("serve", "Serve the annotation API");
  std::string addr = "127.0.0.1:8080";
  serve->add_option("--addr", addr, "HOST:PORT")->capture_default_str();

  auto* report = app.add_subcommand("report", "Export leaderboards and per-generation series");
  fs::path report_dir;
  report->add_option("--out", report_dir, "Output directory")->required();

  auto* imp = app.add_subcommand("importance", "Fit a random forest and export keyword importance");
  fs::path imp_out;
  int imp_repeats = 10;
  imp->add_option("--out", imp_out, "CSV path; plot data goes next to it as .json")->required();
  imp->add_option("--repeats", imp_repeats, "Permutation repeats")->capture_default_str();

  auto* rep = app.add_subcommand("replay", "Rebuild state from a judgment log and print the leaderboard");
  fs::path rep_log;
  std::size_t rep_top = 10;
  rep->add_option("--log", rep_log, "Judgment log (JSON lines)")->required()->check(CLI::ExistingFile);
  rep->add_option("--top", rep_top, "Leaderboard rows to print")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) {
      write_fresh_run_dir(load_run_config(init_config), run_dir, init_force);
      std::cout << "initialised " << (run_dir / kConfigFile).string() << '\n';
    } else if (*run_cmd) {
      auto run = replay_run_dir(run_dir);
      run.extend_iterations(iterations);
      auto config = run.config();
      save_run_config(config, run_dir / kConfigFile);
      return run_simulation(run, run_dir);
    } else if (*sim) {
      auto config = load_run_config(sim_config.empty() ? run_dir / kConfigFile : sim_config);
      config.seed = sim_seed;
      config.mode = RunMode::simulate;
      write_fresh_run_dir(config, run_dir, sim_force);
      auto run = init_run(config);
      return run_simulation(run, run_dir);
    } else if (*serve) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw ConfigError("--addr must be HOST:PORT");
      const auto host = addr.substr(0, colon);
      const int port = std::stoi(addr.substr(colon + 1));
      auto run = replay_run_dir(run_dir);
      run.attach_log(run_dir / kLogFile);
      const char* token = std::getenv(kAdminTokenEnv);
      Server server(run, token ? token : "");
      if (!server.bind(host, port)) throw IoError("cannot bind " + addr);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << addr << '\n' << std::flush;
      server.listen_after_bind();
      g_server = nullptr;
    } else if (*report) {
      const auto run = replay_run_dir(run_dir);
      const auto bundle = export_results(run, report_dir);
      for (const auto& p : {bundle.leaderboard, bundle.validation_leaderboard, bundle.generations, bundle.best,
                            bundle.workers, bundle.tasks, bundle.summary})
        if (!p.empty()) std::cout << p.string() << '\n';
    } else if (*imp) {
      const auto run = replay_run_dir(run_dir);
      const auto result = keyword_importance(run, {}, imp_repeats, run.config().seed);
      if (imp_out.has_parent_path()) fs::create_directories(imp_out.parent_path());
      write_keyword_importance(result, run.inputs().catalog, imp_out);
      std::cout << imp_out.string() << '\n';
    } else if (*rep) {
      const auto run = replay(rep_log, run_dir_config(run_dir));
      print_status(run, rep_top, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
