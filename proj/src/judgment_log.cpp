#include "promptga/judgment_log.hpp"

#include "promptga/errors.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace promptga {

JudgmentLog::JudgmentLog(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open judgment log " + path.string() + ": " + std::strerror(errno));
}

JudgmentLog::~JudgmentLog() {
  if (fd_ >= 0) ::close(fd_);
}

void JudgmentLog::append(const JudgmentEvent& event) {
  const std::string line = to_json(event).dump() + '\n';
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("judgment log write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw IoError("judgment log fsync failed: " + std::string(std::strerror(errno)));
}

std::vector<JudgmentEvent> read_judgment_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open judgment log " + path.string());
  std::vector<JudgmentEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    // Offsets count records, matching RunState::log_offset().
    const auto fail = [&](const char* what) {
      return ReplayError("corrupt record at offset " + std::to_string(events.size()) + " (line " +
                         std::to_string(line_no) + "): " + what);
    };
    try {
      events.push_back(judgment_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(e.what());
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
  }
  return events;
}

}  // namespace promptga
