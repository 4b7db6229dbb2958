#include "promptga/judgment.hpp"

#include "promptga/errors.hpp"

namespace promptga {

nlohmann::json to_json(const JudgmentEvent& e) {
  return {{"task_id", e.task_id},
          {"worker_id", e.worker_id},
          {"choice", std::string(to_string(e.choice))},
          {"submitted_at", e.submitted_at},
          {"page_id", e.page_id}};
}

JudgmentEvent judgment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("judgment must be a JSON object");
  static constexpr const char* kFields[] = {"task_id", "worker_id", "choice", "submitted_at", "page_id"};
  for (const char* f : kFields)
    if (!j.contains(f)) throw ParseError(std::string("judgment is missing field '") + f + "'");
  if (j.size() != std::size(kFields)) throw ParseError("judgment has unexpected fields");
  try {
    JudgmentEvent e;
    e.task_id = j.at("task_id").get<TaskId>();
    e.worker_id = j.at("worker_id").get<std::string>();
    e.choice = parse_side(j.at("choice").get<std::string>());
    e.submitted_at = j.at("submitted_at").get<std::int64_t>();
    e.page_id = j.at("page_id").get<PageId>();
    if (e.worker_id.empty()) throw ParseError("judgment has an empty worker_id");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed judgment: ") + ex.what());
  }
}

}  // namespace promptga
