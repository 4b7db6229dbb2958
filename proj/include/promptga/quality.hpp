#pragma once

#include "promptga/judgment.hpp"
#include "promptga/scheduler.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace promptga {

enum class WorkerStatus { active, suspended, disqualified };
enum class QualityMode { threshold, one_mistake };

std::string_view to_string(WorkerStatus s) noexcept;
std::string_view to_string(QualityMode m) noexcept;
QualityMode parse_quality_mode(std::string_view s);

struct QualityPolicy {
  QualityMode mode = QualityMode::one_mistake;
  double accuracy_floor = 0.8;
  int min_goldens = 5;
  double min_page_seconds = 15.0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct WorkerRecord {
  std::string worker_id;
  int golden_seen = 0;
  int golden_correct = 0;
  WorkerStatus status = WorkerStatus::active;
  std::vector<std::pair<PageId, double>> page_timings;
  /// Log position of the event that ended the worker's active status.
  std::optional<std::uint64_t> deactivated_at;

  bool active() const noexcept { return status == WorkerStatus::active; }
  double accuracy() const noexcept {
    return golden_seen == 0 ? 1.0 : static_cast<double>(golden_correct) / golden_seen;
  }
  friend bool operator==(const WorkerRecord&, const WorkerRecord&) = default;
};

inline constexpr std::size_t kQualificationItems = 5;

/// Pass iff all five (given, correct) answers agree.
bool qualification_check(std::span<const std::pair<Side, Side>> answers);

/// one_mistake: any miss disqualifies. threshold: once min_goldens are seen,
/// accuracy strictly below the floor suspends.
WorkerRecord record_golden(WorkerRecord record, bool correct, const QualityPolicy& policy,
                           std::optional<std::uint64_t> event_seq = std::nullopt);

/// Suspends when the page took strictly less than min_page_seconds.
WorkerRecord record_page_time(WorkerRecord record, PageId page_id, double seconds, const QualityPolicy& policy,
                              std::optional<std::uint64_t> event_seq = std::nullopt);

using WorkerLedger = std::map<std::string, WorkerRecord>;

/// Keeps non-golden judgments whose worker was active when they were
/// submitted. Position in `judgments` is the log sequence number.
std::vector<JudgmentEvent> filter_judgments(std::span<const JudgmentEvent> judgments, const WorkerLedger& workers,
                                            const std::function<bool(TaskId)>& is_golden);

/// `worker_id,golden_seen,golden_correct,status`.
void write_worker_csv(std::ostream& out, const WorkerLedger& workers);

}  // namespace promptga
