#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "linea/sim.hpp"

namespace linea {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Request bodies. Each parser throws Error with a path-qualified message
/// when the document does not match its schema under docs/.
SolveParams parse_solve_params(const nlohmann::json& doc, SolveParams base = {});
int parse_step_request(const nlohmann::json& doc);
struct ReplanRequest {
  std::optional<int> window;
  SolveParams params;
};
ReplanRequest parse_replan_request(const nlohmann::json& doc, const SolveParams& base = {});

/// One planning session: an instance, at most one background solve, the
/// current schedule and a simulator following it. Every handler takes the
/// session gate, so concurrent requests act in some sequential order. The
/// solve worker publishes progress snapshots and takes the gate only to
/// install its result.
class Session {
 public:
  explicit Session(ProblemInstance instance, SimOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ApiResponse get_instance() const;
  /// Starts a background solve. 409 while another solve is running.
  ApiResponse start_plan(const nlohmann::json& body);
  ApiResponse plan_status() const;
  ApiResponse cancel_plan();
  ApiResponse get_schedule() const;
  ApiResponse sim_state() const;
  ApiResponse sim_step(const nlohmann::json& body);
  ApiResponse sim_anomaly(const nlohmann::json& body);
  ApiResponse replan(const nlohmann::json& body);

  /// Routes a request by method and path. Bodies that are not JSON get 422.
  ApiResponse dispatch(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks until the running solve, if any, has finished.
  void wait_for_plan();

 private:
  enum class JobState { Idle, Running, Done, Cancelled, Failed };
  static const char* to_string(JobState state);

  void run_job(int job, SolveParams params);
  ApiResponse busy() const;
  nlohmann::json status_json() const;

  ProblemInstance instance_;
  SimOptions options_;

  mutable std::mutex gate_;  // guards sim_
  std::optional<Simulator> sim_;  // follows the current schedule once one exists

  mutable std::mutex job_mutex_;  // job bookkeeping and progress snapshot
  std::condition_variable job_done_;
  int job_ = 0;
  JobState job_state_ = JobState::Idle;
  Progress progress_;
  std::string job_message_;
  std::string job_status_;
  std::atomic<bool> cancel_{false};
  std::thread worker_;
};

/// HTTP front end for a session. Responses are JSON; every route answers
/// cross-origin requests so a browser console can poll it.
class HttpServer {
 public:
  explicit HttpServer(Session& session);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; port 0 picks a free one. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace linea
