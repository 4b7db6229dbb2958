#include "promptga/server.hpp"

#include "promptga/errors.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace promptga {

namespace {

constexpr const char* kJson = "application/json";

constexpr const char* kIndexHtml = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Which set is better?</title></head>
<body><h1>Annotation server</h1>
<p>The annotation UI bundle is not installed. Set <code>static_dir</code> in the run config.</p>
</body></html>
)";

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), kJson);
}

std::int64_t system_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Server::Server(Run& run, std::string admin_token)
    : run_(run), admin_token_(std::move(admin_token)), assets_(run.config()), clock_(system_ms) {
  for (const auto& [id, record] : run_.state().workers) qualified_.insert(id);
  run_.set_require_lease(true);
  routes();
}

int Server::bind_any_port(const std::string& host) { return http_.bind_to_any_port(host); }
bool Server::bind(const std::string& host, int port) { return http_.bind_to_port(host, port); }
void Server::listen_after_bind() { http_.listen_after_bind(); }
void Server::stop() { http_.stop(); }
void Server::wait_until_ready() const { http_.wait_until_ready(); }

nlohmann::json Server::qualification_items(const std::string& worker_id) {
  auto rng = derive_rng(run_.config().seed, {0x9a11, std::hash<std::string>{}(worker_id)});
  const auto& state = run_.state();
  const auto& descriptions = run_.inputs().descriptions;
  Qualification q;
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = 0; i < kQualificationItems; ++i) {
    const auto d = descriptions[uniform_int<std::size_t>(rng, 0, descriptions.size() - 1)].id;
    const auto real = state.candidates[uniform_int<std::size_t>(rng, 0, state.candidates.size() - 1)].id;
    const Side real_side = uniform_int(rng, 0, 1) == 0 ? Side::left : Side::right;
    const auto left = real_side == Side::left ? real : distractor_of(real);
    const auto right = real_side == Side::left ? distractor_of(real) : real;
    assets_.ensure(run_, d, left);
    assets_.ensure(run_, d, right);
    q.answers.push_back(real_side);
    items.push_back({{"item_id", i},
                     {"description", run_.inputs().description(d).text},
                     {"left", run_.asset_names(d, left)},
                     {"right", run_.asset_names(d, right)}});
  }
  pending_[worker_id] = std::move(q);
  return items;
}

void Server::routes() {
  http_.Get("/api/task", [this](const httplib::Request& req, httplib::Response& res) {
    const auto worker = req.get_param_value("worker");
    if (worker.empty()) return send_error(res, 400, "missing worker parameter");
    std::lock_guard lock(mu_);
    if (!qualified_.contains(worker)) return send_error(res, 403, "qualification required");
    try {
      const auto task = run_.next_task(worker);
      if (!task) {
        res.status = 204;
        return;
      }
      assets_.ensure(run_, task->description_id, task->left_set);
      assets_.ensure(run_, task->description_id, task->right_set);
      res.set_content(to_json(run_.view_of(*task)).dump(), kJson);
    } catch (const AccessError& e) {
      send_error(res, 403, e.what());
    } catch (const IoError& e) {
      send_error(res, 500, e.what());
    }
  });

  http_.Post("/api/judgment", [this](const httplib::Request& req, httplib::Response& res) {
    JudgmentEvent event;
    try {
      event = judgment_from_json(nlohmann::json::parse(req.body));
    } catch (const nlohmann::json::parse_error& e) {
      return send_error(res, 400, e.what());
    } catch (const ParseError& e) {
      return send_error(res, 400, e.what());
    }
    std::lock_guard lock(mu_);
    if (!qualified_.contains(event.worker_id)) return send_error(res, 403, "qualification required");
    // The server clock is authoritative; keep each worker's timestamps monotone.
    const auto& clocks = run_.state().clocks;
    const auto c = clocks.find(event.worker_id);
    event.submitted_at = std::max(clock_(), c != clocks.end() ? c->second.last_submitted_at : 0);
    try {
      run_.submit_judgment(event);
      const auto& worker = run_.state().workers.at(event.worker_id);
      res.set_content(nlohmann::json{{"ok", true}, {"worker_status", to_string(worker.status)}}.dump(), kJson);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const AccessError& e) {
      send_error(res, 403, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const IoError& e) {
      send_error(res, 500, e.what());
    }
  });

  http_.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    const auto& state = run_.state();
    nlohmann::json top = nlohmann::json::array();
    const auto agg = run_.aggregate();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, agg.train_board.size()); ++i)
      top.push_back({{"candidate_id", agg.train_board[i].id}, {"average_rank", agg.train_board[i].average_rank}});
    res.set_content(nlohmann::json{{"generation", state.generation},
                                   {"n_candidates", state.candidates.size()},
                                   {"open_tasks", state.open_tasks()},
                                   {"terminal", state.terminal},
                                   {"leaderboard_top10", top}}
                        .dump(),
                    kJson);
  });

  http_.Post("/api/step", [this](const httplib::Request& req, httplib::Response& res) {
    if (admin_token_.empty()) return send_error(res, 403, "administration is disabled");
    if (req.get_header_value("Authorization") != "Bearer " + admin_token_)
      return send_error(res, 401, "invalid admin token");
    std::lock_guard lock(mu_);
    try {
      const bool advanced = run_.step();
      res.set_content(nlohmann::json{{"advanced", advanced},
                                     {"generation", run_.state().generation},
                                     {"terminal", run_.state().terminal},
                                     {"reason", run_.state().terminal_reason}}
                          .dump(),
                      kJson);
    } catch (const NotReadyError& e) {
      send_error(res, 409, e.what());
    } catch (const IoError& e) {
      send_error(res, 500, e.what());
    }
  });

  http_.Get("/api/qualify", [this](const httplib::Request& req, httplib::Response& res) {
    const auto worker = req.get_param_value("worker");
    if (worker.empty()) return send_error(res, 400, "missing worker parameter");
    std::lock_guard lock(mu_);
    if (failed_.contains(worker)) return send_error(res, 403, "qualification failed");
    if (qualified_.contains(worker)) {
      res.set_content(nlohmann::json{{"worker_id", worker}, {"qualified", true}, {"items", nlohmann::json::array()}}
                          .dump(),
                      kJson);
      return;
    }
    try {
      res.set_content(
          nlohmann::json{{"worker_id", worker}, {"qualified", false}, {"items", qualification_items(worker)}}.dump(),
          kJson);
    } catch (const IoError& e) {
      send_error(res, 500, e.what());
    }
  });

  http_.Post("/api/qualify", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      return send_error(res, 400, e.what());
    }
    std::lock_guard lock(mu_);
    try {
      const auto worker = body.at("worker_id").get<std::string>();
      const auto it = pending_.find(worker);
      if (it == pending_.end()) return send_error(res, 404, "no qualification in progress for " + worker);
      std::vector<std::pair<Side, Side>> answers;
      std::set<std::size_t> seen;
      for (const auto& a : body.at("answers")) {
        const auto item = a.at("item_id").get<std::size_t>();
        if (item >= it->second.answers.size() || !seen.insert(item).second)
          return send_error(res, 400, "invalid or repeated item_id");
        answers.emplace_back(parse_side(a.at("choice").get<std::string>()), it->second.answers[item]);
      }
      const bool passed = qualification_check(answers);
      pending_.erase(it);
      (passed ? qualified_ : failed_).insert(worker);
      res.set_content(nlohmann::json{{"worker_id", worker}, {"passed", passed}}.dump(), kJson);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    }
  });

  http_.Get(R"(/assets/([0-9a-f]{16}))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    if (const auto file = assets_.file_of(name)) {
      std::ifstream in(*file, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      const auto bytes = buf.str();
      const bool png = bytes.size() >= 8 && bytes.compare(0, 4, "\x89PNG") == 0;
      res.set_content(bytes, png ? "image/png" : "application/octet-stream");
      return;
    }
    res.set_content(AssetStore::placeholder_svg(name), "image/svg+xml");
  });

  const auto& static_dir = run_.config().static_dir;
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    http_.set_mount_point("/", static_dir.string());
  } else {
    http_.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kIndexHtml, "text/html"); });
  }
}

}  // namespace promptga
