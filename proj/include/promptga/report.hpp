#pragma once

#include "promptga/importance.hpp"
#include "promptga/orchestrator.hpp"

#include <filesystem>
#include <vector>

namespace promptga {

struct ReportBundle {
  std::filesystem::path leaderboard;             // training descriptions
  std::filesystem::path validation_leaderboard;  // empty when there are no validation descriptions
  std::filesystem::path generations;
  std::filesystem::path best;
  std::filesystem::path workers;
  std::filesystem::path tasks;
  std::filesystem::path summary;
};

/// Writes the leaderboards, per-generation series, best keyword list, worker
/// ledger, task records and a JSON summary into `dir`. Throws StateError
/// before the first generation has been judged.
ReportBundle export_results(const Run& run, const std::filesystem::path& dir);

/// One line: the best set's keywords in prompt order, joined by ", ".
std::string keyword_line(const KeywordMask& mask, const KeywordCatalog& catalog);

struct KeywordImportance {
  TrainingTable table;
  ImportanceReport impurity;
  ImportanceReport permutation;
  std::vector<SelectionEffect> effects;
};

/// Fits a forest on (mask, training average rank) over all candidates.
KeywordImportance keyword_importance(const Run& run, const ForestOptions& options = {}, int repeats = 10,
                                     std::uint64_t seed = 0);

/// Writes the CSV to `csv_path` and the top-15 plot data next to it (.json).
void write_keyword_importance(const KeywordImportance& importance, const KeywordCatalog& catalog,
                              const std::filesystem::path& csv_path);

}  // namespace promptga
