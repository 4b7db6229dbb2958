#pragma once

#include "promptga/judgment.hpp"

#include <filesystem>
#include <vector>

namespace promptga {

/// Append-only JSON-lines judgment log. Each append is a single write(2) on an
/// O_APPEND descriptor followed by fsync.
class JudgmentLog {
 public:
  explicit JudgmentLog(const std::filesystem::path& path);
  ~JudgmentLog();
  JudgmentLog(const JudgmentLog&) = delete;
  JudgmentLog& operator=(const JudgmentLog&) = delete;

  void append(const JudgmentEvent& event);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Reads every event; a malformed line raises ReplayError naming its offset.
std::vector<JudgmentEvent> read_judgment_log(const std::filesystem::path& path);

}  // namespace promptga
