#include "linea/service.hpp"

#include <functional>

#include "httplib.h"
#include "linea/instance_io.hpp"

namespace linea {

using nlohmann::json;

namespace {

ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

void only_keys(const json& doc, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw Error(where + "." + key + ": unknown field");
  }
}

int integer_at_least(const json& doc, const std::string& where, const char* key, int min) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw Error(where + "." + key + ": expected an integer");
  const auto n = v.get<long long>();
  if (n < min || n > 1000000000) throw Error(where + "." + key + ": out of range");
  return static_cast<int>(n);
}

double number_at_least(const json& doc, const std::string& where, const char* key, double min, bool inclusive) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw Error(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (inclusive ? x < min : x <= min) throw Error(where + "." + key + ": out of range");
  return x;
}

json progress_json(const Progress& p) {
  json j = {{"nodes", p.nodes}, {"has_incumbent", p.has_incumbent}, {"bound", p.bound}};
  j["incumbent"] = p.has_incumbent ? json(p.incumbent) : json(nullptr);
  return j;
}

}  // namespace

SolveParams parse_solve_params(const json& doc, SolveParams base) {
  const std::string where = "params";
  if (!doc.is_object()) throw Error(where + ": expected an object");
  only_keys(doc, where, {"gap", "time_limit", "node_limit"});
  if (doc.contains("gap")) base.gap = number_at_least(doc, where, "gap", 0.0, true);
  if (doc.contains("time_limit")) base.time_limit = number_at_least(doc, where, "time_limit", 0.0, false);
  if (doc.contains("node_limit")) base.node_limit = integer_at_least(doc, where, "node_limit", 1);
  return base;
}

int parse_step_request(const json& doc) {
  if (doc.is_number_integer()) return integer_at_least(json{{"steps", doc}}, "step", "steps", 1);
  if (!doc.is_object()) throw Error("step: expected an object or an integer");
  only_keys(doc, "step", {"steps"});
  return doc.contains("steps") ? integer_at_least(doc, "step", "steps", 1) : 1;
}

ReplanRequest parse_replan_request(const json& doc, const SolveParams& base) {
  if (!doc.is_object()) throw Error("replan: expected an object");
  only_keys(doc, "replan", {"window", "params"});
  ReplanRequest r;
  r.params = base;
  if (doc.contains("window")) r.window = integer_at_least(doc, "replan", "window", 1);
  if (doc.contains("params")) r.params = parse_solve_params(doc.at("params"), base);
  return r;
}

const char* Session::to_string(JobState state) {
  switch (state) {
    case JobState::Idle: return "idle";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Cancelled: return "cancelled";
    case JobState::Failed: return "failed";
  }
  return "?";
}

Session::Session(ProblemInstance instance, SimOptions options)
    : instance_(std::move(instance)), options_(std::move(options)) {
  if (auto v = validate(instance_); !v.empty()) throw ValidationError(std::move(v));
}

Session::~Session() {
  cancel_ = true;
  if (worker_.joinable()) worker_.join();
}

ApiResponse Session::busy() const { return error(409, "a solve is already running"); }

ApiResponse Session::get_instance() const { return {200, instance_to_json(instance_)}; }

ApiResponse Session::start_plan(const json& body) {
  SolveParams params;
  try {
    params = parse_solve_params(body.is_null() ? json::object() : body, options_.solve);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  std::lock_guard<std::mutex> gate(gate_);
  int job = 0;
  {
    std::lock_guard<std::mutex> lock(job_mutex_);
    if (job_state_ == JobState::Running) return busy();
    job = ++job_;
  }
  // The previous worker has published its result and no longer needs a lock.
  if (worker_.joinable()) worker_.join();
  {
    std::lock_guard<std::mutex> lock(job_mutex_);
    job_state_ = JobState::Running;
    progress_ = {};
    job_message_.clear();
    job_status_.clear();
  }
  cancel_ = false;
  worker_ = std::thread([this, job, params] { run_job(job, params); });
  return {202, json{{"job", "plan-" + std::to_string(job)}, {"state", "running"}}};
}

void Session::run_job(int job, SolveParams params) {
  params.cancel = &cancel_;
  params.on_progress = [this](const Progress& p) {
    std::lock_guard<std::mutex> lock(job_mutex_);
    progress_ = p;
  };
  JobState state = JobState::Failed;
  std::string message;
  std::string status;
  std::optional<Simulator> sim;
  try {
    const Encoding enc = encode(instance_);
    const MILPSolution sol = solve_milp(enc.model, params);
    status = linea::to_string(sol.status);
    if (sol.has_solution()) {
      Schedule plan = decode_schedule(sol, enc, instance_);
      message = "makespan " + std::to_string(plan.makespan);
      sim.emplace(instance_, std::move(plan), options_);
      state = sol.status == MILPStatus::Optimal || !cancel_ ? JobState::Done : JobState::Cancelled;
    } else if (sol.status == MILPStatus::Infeasible) {
      message = "the instance is infeasible";
      for (const auto& h : enc.hints) message += "; " + h;
    } else {
      message = "stopped without a schedule";
      if (cancel_) state = JobState::Cancelled;
    }
    std::lock_guard<std::mutex> lock(job_mutex_);
    progress_.nodes = sol.nodes;
    progress_.bound = sol.bound;
    progress_.has_incumbent = sol.has_solution();
    progress_.incumbent = sol.objective;
  } catch (const std::exception& e) {
    message = e.what();
  }
  std::lock_guard<std::mutex> gate(gate_);
  if (sim) sim_ = std::move(sim);
  std::lock_guard<std::mutex> lock(job_mutex_);
  if (job == job_) {
    job_state_ = state;
    job_message_ = message;
    job_status_ = status;
  }
  job_done_.notify_all();
}

json Session::status_json() const {
  json j = {{"job", job_ > 0 ? json("plan-" + std::to_string(job_)) : json(nullptr)},
            {"state", to_string(job_state_)},
            {"progress", progress_json(progress_)}};
  if (!job_status_.empty()) j["status"] = job_status_;
  if (!job_message_.empty()) j["message"] = job_message_;
  return j;
}

ApiResponse Session::plan_status() const {
  std::lock_guard<std::mutex> lock(job_mutex_);
  return {200, status_json()};
}

ApiResponse Session::cancel_plan() {
  std::lock_guard<std::mutex> gate(gate_);
  std::lock_guard<std::mutex> lock(job_mutex_);
  if (job_state_ != JobState::Running) return error(409, "no solve is running");
  cancel_ = true;
  return {202, status_json()};
}

void Session::wait_for_plan() {
  std::unique_lock<std::mutex> lock(job_mutex_);
  job_done_.wait(lock, [this] { return job_state_ != JobState::Running; });
}

ApiResponse Session::get_schedule() const {
  std::lock_guard<std::mutex> gate(gate_);
  if (!sim_) return error(404, "no schedule yet");
  return {200, schedule_to_json(sim_->plan())};
}

ApiResponse Session::sim_state() const {
  std::lock_guard<std::mutex> gate(gate_);
  if (!sim_) return error(404, "no schedule yet");
  return {200, sim_->state_json()};
}

ApiResponse Session::sim_step(const json& body) {
  int steps = 0;
  try {
    steps = parse_step_request(body.is_null() ? json::object() : body);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  std::lock_guard<std::mutex> gate(gate_);
  {
    std::lock_guard<std::mutex> lock(job_mutex_);
    if (job_state_ == JobState::Running) return busy();
  }
  if (!sim_) return error(404, "no schedule yet");
  if (sim_->finished()) return error(409, "the simulation has reached the end of the horizon");
  json events = json::array();
  for (int i = 0; i < steps && !sim_->finished(); ++i)
    for (const auto& ev : sim_->step())
      events.push_back({{"step", ev.step}, {"kind", ev.kind}, {"subject", ev.subject}, {"message", ev.message}});
  return {200, json{{"clock", sim_->clock()}, {"events", events}, {"state", sim_->state_json()}}};
}

ApiResponse Session::sim_anomaly(const json& body) {
  AnomalyEvent event;
  try {
    event = anomaly_from_json(body);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  std::lock_guard<std::mutex> gate(gate_);
  {
    std::lock_guard<std::mutex> lock(job_mutex_);
    if (job_state_ == JobState::Running) return busy();
  }
  if (!sim_) return error(404, "no schedule yet");
  try {
    sim_->inject(event);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  return {200, sim_->state_json()};
}

ApiResponse Session::replan(const json& body) {
  ReplanRequest request;
  try {
    request = parse_replan_request(body.is_null() ? json::object() : body, options_.solve);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  std::lock_guard<std::mutex> gate(gate_);
  {
    std::lock_guard<std::mutex> lock(job_mutex_);
    if (job_state_ == JobState::Running) return busy();
  }
  if (!sim_) return error(404, "no schedule yet");
  if (sim_->finished()) return error(409, "nothing is left to plan at the end of the horizon");

  const int previous = sim_->plan().makespan;
  ReplanResult r;
  try {
    r = sim_->replan(request.window, request.params);
  } catch (const Error& e) {
    return error(422, e.what());
  }
  json j = {{"applied", r.applied},
            {"clock", r.clock},
            {"window", r.window},
            {"status", linea::to_string(r.solution.status)},
            {"message", r.message},
            {"previous_makespan", previous},
            {"makespan", sim_->plan().makespan},
            {"schedule", schedule_to_json(sim_->plan())}};
  j["objective"] = r.applied ? json(r.solution.objective) : json(nullptr);
  return {200, j};
}

ApiResponse Session::dispatch(const std::string& method, const std::string& path, const std::string& body) {
  using Handler = std::function<ApiResponse(const json&)>;
  struct Route {
    const char* method;
    const char* path;
    Handler handler;
  };
  const Route routes[] = {
      {"GET", "/api/instance", [this](const json&) { return get_instance(); }},
      {"POST", "/api/plan", [this](const json& b) { return start_plan(b); }},
      {"GET", "/api/plan/status", [this](const json&) { return plan_status(); }},
      {"POST", "/api/plan/cancel", [this](const json&) { return cancel_plan(); }},
      {"GET", "/api/schedule", [this](const json&) { return get_schedule(); }},
      {"GET", "/api/sim/state", [this](const json&) { return sim_state(); }},
      {"POST", "/api/sim/step", [this](const json& b) { return sim_step(b); }},
      {"POST", "/api/sim/anomaly", [this](const json& b) { return sim_anomaly(b); }},
      {"POST", "/api/replan", [this](const json& b) { return replan(b); }},
  };
  bool known_path = false;
  for (const auto& r : routes) {
    if (path != r.path) continue;
    known_path = true;
    if (method != r.method) continue;
    json doc;
    if (body.find_first_not_of(" \t\r\n") != std::string::npos) {
      doc = json::parse(body, nullptr, false);
      if (doc.is_discarded()) return error(422, "the request body is not valid JSON");
    }
    return r.handler(doc);
  }
  return known_path ? error(405, "method not allowed") : error(404, "no such endpoint");
}

struct HttpServer::Impl {
  Session& session;
  httplib::Server server;

  explicit Impl(Session& s) : session(s) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    auto handle = [this](const httplib::Request& req, httplib::Response& res) {
      const ApiResponse r = session.dispatch(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/api/.*)", handle);
    server.Post(R"(/api/.*)", handle);
    server.Put(R"(/api/.*)", handle);
    server.Delete(R"(/api/.*)", handle);
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

HttpServer::HttpServer(Session& session) : impl_(std::make_unique<Impl>(session)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace linea
