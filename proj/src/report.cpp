#include "promptga/report.hpp"

#include "promptga/errors.hpp"

#include <fstream>
#include <iomanip>

namespace promptga {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string keyword_line(const KeywordMask& mask, const KeywordCatalog& catalog) {
  std::string line;
  for (const auto& kw : sorted_keywords(mask, catalog)) {
    if (!line.empty()) line += ", ";
    line += kw;
  }
  return line;
}

ReportBundle export_results(const Run& run, const std::filesystem::path& dir) {
  const auto agg = run.aggregate();
  if (agg.train_board.empty()) throw StateError("no generation has been judged yet");
  std::filesystem::create_directories(dir);
  const auto& state = run.state();
  const auto mask_of = [&](CandidateId id) -> const KeywordMask& { return run.mask_of(id); };
  ReportBundle bundle;

  bundle.leaderboard = dir / "leaderboard.csv";
  {
    auto out = open_out(bundle.leaderboard);
    write_leaderboard_csv(out, agg.train_board, mask_of);
  }
  if (!agg.validation_board.empty()) {
    bundle.validation_leaderboard = dir / "leaderboard_validation.csv";
    auto out = open_out(bundle.validation_leaderboard);
    write_leaderboard_csv(out, agg.validation_board, mask_of);
  }

  std::map<CandidateId, double> final_rank;
  for (const auto& e : agg.train_board) final_rank[e.id] = e.average_rank;
  bundle.generations = dir / "generations.csv";
  {
    auto out = open_out(bundle.generations);
    out << "generation,candidate_id,average_rank,best_average_rank_so_far\n";
    double best = 0;
    for (const auto& c : state.candidates) {
      const double r = final_rank.at(c.id);
      best = std::max(best, r);
      out << c.generation << ',' << c.id << ',' << std::setprecision(10) << r << ',' << best << '\n';
    }
  }

  const auto& top = agg.train_board.front();
  bundle.best = dir / "best.txt";
  {
    auto out = open_out(bundle.best);
    out << "candidate_id: " << top.id << '\n'
        << "average_rank: " << std::setprecision(10) << top.average_rank << '\n'
        << "mask_hex: " << run.mask_of(top.id).to_hex() << '\n'
        << "keywords: " << keyword_line(run.mask_of(top.id), run.inputs().catalog) << '\n';
  }

  bundle.workers = dir / "workers.csv";
  {
    auto out = open_out(bundle.workers);
    write_worker_csv(out, state.workers);
  }

  bundle.tasks = dir / "tasks.jsonl";
  {
    auto out = open_out(bundle.tasks);
    // Analyst export: unlike the annotator wire form it carries the outcome.
    for (const auto& t : state.tasks) {
      auto j = to_json(t.task);
      j["page_id"] = t.page_id;
      j["generation"] = t.generation;
      if (t.task.golden_answer) j["golden_answer"] = std::string(to_string(*t.task.golden_answer));
      if (t.judged()) {
        j["choice"] = std::string(to_string(t.choice));
        j["worker_id"] = t.worker_id;
        j["log_offset"] = *t.judged_at;
      }
      out << j.dump() << '\n';
    }
  }

  bundle.summary = dir / "summary.json";
  {
    nlohmann::json top10 = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, agg.train_board.size()); ++i)
      top10.push_back({{"candidate_id", agg.train_board[i].id}, {"average_rank", agg.train_board[i].average_rank}});
    nlohmann::json summary = {{"generation", state.generation},
                              {"n_candidates", state.candidates.size()},
                              {"judgments", state.log.size()},
                              {"terminal", state.terminal},
                              {"terminal_reason", state.terminal_reason},
                              {"best_candidate", top.id},
                              {"best_keywords", sorted_keywords(run.mask_of(top.id), run.inputs().catalog)},
                              {"leaderboard_top10", top10}};
    auto out = open_out(bundle.summary);
    out << summary.dump(2) << '\n';
  }
  return bundle;
}

KeywordImportance keyword_importance(const Run& run, const ForestOptions& options, int repeats, std::uint64_t seed) {
  const auto agg = run.aggregate();
  if (agg.train_board.empty()) throw StateError("no generation has been judged yet");
  std::map<CandidateId, double> rank;
  for (const auto& e : agg.train_board) rank[e.id] = e.average_rank;
  std::vector<KeywordMask> masks;
  std::vector<double> targets;
  for (const auto& c : run.state().candidates) {
    masks.push_back(c.mask);
    targets.push_back(rank.at(c.id));
  }
  KeywordImportance out;
  out.table = TrainingTable::from_masks(masks, targets);
  Rng rng(seed);
  const auto forest = fit_forest(out.table, options, rng);
  out.impurity = impurity_importance(forest);
  out.permutation = permutation_importance(forest, out.table, repeats, rng);
  out.effects = selection_effects(out.table);
  return out;
}

void write_keyword_importance(const KeywordImportance& importance, const KeywordCatalog& catalog,
                              const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  {
    auto out = open_out(csv_path);
    write_importance_csv(out, catalog, importance.impurity, importance.permutation, importance.effects);
  }
  auto plot_path = csv_path;
  plot_path.replace_extension(".json");
  auto out = open_out(plot_path);
  out << importance_plot_json(catalog, importance.impurity, importance.permutation, importance.effects).dump(2)
      << '\n';
}

}  // namespace promptga
