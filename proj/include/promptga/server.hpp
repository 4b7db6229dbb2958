#pragma once

#include "promptga/generator.hpp"
#include "promptga/orchestrator.hpp"

#include <httplib.h>

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace promptga {

inline constexpr const char* kAdminTokenEnv = "PROMPTGA_ADMIN_TOKEN";

/// HTTP front end for the annotation loop. All state changes go through one
/// mutex; the Run stays the single writer.
///
///   GET  /api/task?worker=ID      task payload, 204 when the queue is empty
///   POST /api/judgment            200, 400, 403, 404 or 409
///   GET  /api/status              generation, n_candidates, open_tasks, leaderboard_top10
///   POST /api/step                bearer-token protected
///   GET  /api/qualify?worker=ID   five qualification items
///   POST /api/qualify             {worker_id, answers: [{item_id, choice}]}
///   GET  /assets/<name>           generated image or placeholder
class Server {
 public:
  /// An empty admin token disables /api/step.
  Server(Run& run, std::string admin_token);

  /// Binds to an ephemeral port and returns it.
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen_after_bind();
  void stop();
  void wait_until_ready() const;

  /// Epoch milliseconds stamped on judgments; replaceable in tests.
  void set_clock(std::function<std::int64_t()> clock) { clock_ = std::move(clock); }

 private:
  struct Qualification {
    std::vector<Side> answers;
  };

  void routes();
  nlohmann::json qualification_items(const std::string& worker_id);

  Run& run_;
  std::string admin_token_;
  AssetStore assets_;
  httplib::Server http_;
  std::mutex mu_;
  std::set<std::string> qualified_;
  std::set<std::string> failed_;
  std::map<std::string, Qualification> pending_;
  std::function<std::int64_t()> clock_;
};

}  // namespace promptga
