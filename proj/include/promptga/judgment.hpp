#pragma once

#include "promptga/scheduler.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace promptga {

/// One worker's choice on one task; the unit of the append-only log.
struct JudgmentEvent {
  TaskId task_id = 0;
  std::string worker_id;
  Side choice = Side::left;
  std::int64_t submitted_at = 0;  // unix milliseconds
  PageId page_id = 0;

  friend bool operator==(const JudgmentEvent&, const JudgmentEvent&) = default;
};

/// Exactly {task_id, worker_id, choice, submitted_at, page_id}.
nlohmann::json to_json(const JudgmentEvent& e);
/// Throws ParseError on missing, extra or mistyped fields.
JudgmentEvent judgment_from_json(const nlohmann::json& j);

}  // namespace promptga
