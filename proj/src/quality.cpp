#include "promptga/quality.hpp"

#include "promptga/errors.hpp"

namespace promptga {

std::string_view to_string(WorkerStatus s) noexcept {
  switch (s) {
    case WorkerStatus::active: return "active";
    case WorkerStatus::suspended: return "suspended";
    case WorkerStatus::disqualified: return "disqualified";
  }
  return "active";
}

std::string_view to_string(QualityMode m) noexcept {
  return m == QualityMode::threshold ? "threshold" : "one_mistake";
}

QualityMode parse_quality_mode(std::string_view s) {
  if (s == "threshold") return QualityMode::threshold;
  if (s == "one_mistake") return QualityMode::one_mistake;
  throw ConfigError("unknown quality mode '" + std::string(s) + "'");
}

void QualityPolicy::validate() const {
  if (!(accuracy_floor > 0.0 && accuracy_floor <= 1.0)) throw ConfigError("accuracy_floor must lie in (0, 1]");
  if (min_goldens < 1) throw ConfigError("min_goldens must be >= 1");
  if (!(min_page_seconds >= 0.0)) throw ConfigError("min_page_seconds must be non-negative");
}

bool qualification_check(std::span<const std::pair<Side, Side>> answers) {
  if (answers.size() != kQualificationItems)
    throw ValidationError("qualification needs exactly " + std::to_string(kQualificationItems) + " answers, got " +
                          std::to_string(answers.size()));
  for (const auto& [given, correct] : answers)
    if (given != correct) return false;
  return true;
}

WorkerRecord record_golden(WorkerRecord record, bool correct, const QualityPolicy& policy,
                           std::optional<std::uint64_t> event_seq) {
  if (!record.active()) throw StateError("worker " + record.worker_id + " is not active");
  ++record.golden_seen;
  if (correct) ++record.golden_correct;
  if (policy.mode == QualityMode::one_mistake) {
    if (!correct) record.status = WorkerStatus::disqualified;
  } else if (record.golden_seen >= policy.min_goldens && record.accuracy() < policy.accuracy_floor) {
    record.status = WorkerStatus::suspended;
  }
  if (!record.active()) record.deactivated_at = event_seq;
  return record;
}

WorkerRecord record_page_time(WorkerRecord record, PageId page_id, double seconds, const QualityPolicy& policy,
                              std::optional<std::uint64_t> event_seq) {
  if (!(seconds > 0.0)) throw ValidationError("page duration must be positive");
  if (!record.active()) throw StateError("worker " + record.worker_id + " is not active");
  record.page_timings.emplace_back(page_id, seconds);
  if (seconds < policy.min_page_seconds) {
    record.status = WorkerStatus::suspended;
    record.deactivated_at = event_seq;
  }
  return record;
}

std::vector<JudgmentEvent> filter_judgments(std::span<const JudgmentEvent> judgments, const WorkerLedger& workers,
                                            const std::function<bool(TaskId)>& is_golden) {
  std::vector<JudgmentEvent> out;
  for (std::size_t seq = 0; seq < judgments.size(); ++seq) {
    const auto& j = judgments[seq];
    if (is_golden(j.task_id)) continue;
    const auto it = workers.find(j.worker_id);
    if (it != workers.end() && !it->second.active()) {
      // The deactivating event itself was submitted while active.
      const auto& cut = it->second.deactivated_at;
      if (!cut || seq > *cut) continue;
    }
    out.push_back(j);
  }
  return out;
}

void write_worker_csv(std::ostream& out, const WorkerLedger& workers) {
  out << "worker_id,golden_seen,golden_correct,status\n";
  for (const auto& [id, w] : workers)
    out << id << ',' << w.golden_seen << ',' << w.golden_correct << ',' << to_string(w.status) << '\n';
}

}  // namespace promptga
