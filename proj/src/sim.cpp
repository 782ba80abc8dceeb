#include "linea/sim.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "linea/milp.hpp"

namespace linea {

using nlohmann::json;

const char* to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::TaskDelay: return "TaskDelay";
    case AnomalyKind::VehicleSlowdown: return "VehicleSlowdown";
    case AnomalyKind::ResourceUnavailable: return "ResourceUnavailable";
    case AnomalyKind::WorkstationDown: return "WorkstationDown";
  }
  return "?";
}

AnomalyKind parse_anomaly_kind(const std::string& text) {
  for (auto k : {AnomalyKind::TaskDelay, AnomalyKind::VehicleSlowdown, AnomalyKind::ResourceUnavailable,
                 AnomalyKind::WorkstationDown})
    if (text == to_string(k)) return k;
  throw Error("unknown anomaly kind '" + text + "'");
}

const char* to_string(TaskPhase phase) {
  switch (phase) {
    case TaskPhase::Pending: return "pending";
    case TaskPhase::Running: return "running";
    case TaskPhase::Done: return "done";
  }
  return "?";
}

AnomalyEvent anomaly_from_json(const json& doc) {
  if (!doc.is_object()) throw Error("anomaly: expected an object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) throw Error("anomaly.kind: expected a string");
  AnomalyEvent e;
  e.kind = parse_anomaly_kind(doc.at("kind").get<std::string>());
  auto text = [&](const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_string()) throw Error(std::string("anomaly.") + key + ": expected a string");
    return doc.at(key).get<std::string>();
  };
  auto integer = [&](const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_number_integer())
      throw Error(std::string("anomaly.") + key + ": expected an integer");
    return doc.at(key).get<int>();
  };
  std::vector<const char*> keys;
  switch (e.kind) {
    case AnomalyKind::TaskDelay:
      e.target = text("task");
      e.steps = integer("steps");
      keys = {"kind", "task", "steps"};
      break;
    case AnomalyKind::VehicleSlowdown:
      e.target = text("vehicle");
      if (!doc.contains("factor") || !doc.at("factor").is_number()) throw Error("anomaly.factor: expected a number");
      e.factor = doc.at("factor").get<double>();
      keys = {"kind", "vehicle", "factor"};
      break;
    case AnomalyKind::ResourceUnavailable:
      e.target = text("resource");
      e.window = {integer("from"), integer("to")};
      keys = {"kind", "resource", "from", "to"};
      break;
    case AnomalyKind::WorkstationDown:
      e.workstation = integer("workstation");
      e.window = {integer("from"), integer("to")};
      keys = {"kind", "workstation", "from", "to"};
      break;
  }
  for (const auto& [key, value] : doc.items())
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end())
      throw Error("anomaly." + key + ": not allowed for " + to_string(e.kind));
  return e;
}

json anomaly_to_json(const AnomalyEvent& e) {
  json j = {{"kind", to_string(e.kind)}};
  switch (e.kind) {
    case AnomalyKind::TaskDelay:
      j["task"] = e.target;
      j["steps"] = e.steps;
      break;
    case AnomalyKind::VehicleSlowdown:
      j["vehicle"] = e.target;
      j["factor"] = e.factor;
      break;
    case AnomalyKind::ResourceUnavailable:
      j["resource"] = e.target;
      j["from"] = e.window.from;
      j["to"] = e.window.to;
      break;
    case AnomalyKind::WorkstationDown:
      j["workstation"] = e.workstation;
      j["from"] = e.window.from;
      j["to"] = e.window.to;
      break;
  }
  return j;
}

namespace {

bool overlaps(const std::vector<StepWindow>& windows, int from, int to) {
  for (const auto& w : windows)
    if (from < w.to && w.from < to) return true;
  return false;
}

bool same_place(const Position& a, const Position& b) {
  if (a.moving != b.moving) return false;
  if (!a.moving) return a.node == b.node;
  return a.from == b.from && a.to == b.to && a.heading == b.heading;
}

std::string describe(const Position& p) {
  if (!p.moving) return p.node == kStorageNode ? "storage" : "workstation " + std::to_string(p.node);
  return "edge " + std::to_string(p.from) + "-" + std::to_string(p.to) + " toward " + std::to_string(p.heading);
}

// Shifts windows by -k, dropping those already over.
std::vector<StepWindow> shifted(const std::vector<StepWindow>& windows, int k, int horizon) {
  std::vector<StepWindow> out;
  for (const auto& w : windows) {
    StepWindow s{std::max(w.from - k, 0), std::min(w.to - k, horizon)};
    if (s.to > s.from) out.push_back(s);
  }
  return out;
}

}  // namespace

Simulator::Simulator(ProblemInstance instance, Schedule plan, SimOptions options)
    : instance_(std::move(instance)), plan_(std::move(plan)), options_(std::move(options)) {
  if (auto v = validate(instance_); !v.empty()) throw ValidationError(std::move(v));
  if (plan_.horizon != instance_.horizon) throw Error("plan horizon does not match the instance");
  for (const auto& p : plan_.tasks)
    if (!instance_.find_task(p.task)) throw Error("plan schedules unknown task " + p.task);

  for (const auto& r : instance_.resources) {
    unavailable_[r.id] = r.unavailable;
    Position p;
    if (!r.transit) {
      p.node = r.initial_location;
    } else if (r.transit->from == kStorageNode) {
      p.node = kStorageNode;
      credits_.push_back({r.id, r.transit->to, r.transit->arrival_step});
    } else if (r.is_vehicle()) {
      const int n = travel_steps(instance_, r);
      Trip trip{r.id, r.transit->from, r.transit->to, r.transit->arrival_step - n, n, {}};
      for (const auto& u : instance_.resources)
        if (!u.is_vehicle() && u.transit && u.transit->carrier == r.id) trip.cargo.push_back(u.id);
      trips_.push_back(trip);
      p = edge_position(trip.from, trip.to, std::max(n - r.transit->arrival_step, 0), n);
    } else {
      const int n = vehicle_steps(r.transit->carrier);
      p = edge_position(r.transit->from, r.transit->to, std::max(n - r.transit->arrival_step, 0), n);
      p.carrier = r.transit->carrier;
    }
    pos_[r.id] = p;
  }
  for (const auto& w : instance_.workstations) down_[w.id] = w.down;
  planned_until_ = instance_.horizon;
  for (const auto& t : instance_.tasks) tasks_.push_back({t.id, TaskPhase::Pending, -1, -1, 0});

  std::vector<SimEvent> out;
  apply_starts(0, out);
  events_.insert(events_.end(), out.begin(), out.end());
  record_snapshot();
}

int Simulator::resource_index(const std::string& id) const { return instance_.resource_index(id); }

int Simulator::vehicle_steps(const std::string& vehicle) const {
  const auto* v = instance_.find_resource(vehicle);
  if (!v || !v->is_vehicle()) throw Error("unknown vehicle " + vehicle);
  ResourceSpec slowed = *v;
  auto it = speed_.find(vehicle);
  if (it != speed_.end()) slowed.velocity = v->velocity.value_or(1.0) * it->second;
  return travel_steps(instance_, slowed);
}

bool Simulator::unit_unavailable(const std::string& id, int from, int to) const {
  auto it = unavailable_.find(id);
  return it != unavailable_.end() && overlaps(it->second, from, to);
}

bool Simulator::down_at(WorkstationId w, int k) const {
  auto it = down_.find(w);
  return it != down_.end() && overlaps(it->second, k, k + 1);
}

std::vector<std::string> Simulator::units_at(const std::string& type, WorkstationId w) const {
  std::vector<std::string> out;
  for (const auto& r : instance_.resources) {
    if (r.is_vehicle() || r.resource_type != type) continue;
    const auto& p = pos_.at(r.id);
    if (!p.moving && p.node == w) out.push_back(r.id);
  }
  return out;
}

const Position* Simulator::planned_position(const std::string& resource, int k) const {
  const Track* t = plan_.find_track(resource);
  if (!t || k < 0 || k >= static_cast<int>(t->steps.size())) return nullptr;
  return &t->steps[k];
}

const Position& Simulator::position(const std::string& resource) const {
  auto it = pos_.find(resource);
  if (it == pos_.end()) throw Error("unknown resource " + resource);
  return it->second;
}

double Simulator::occupancy(WorkstationId w) const {
  double level = 0.0;
  for (const auto& t : tasks_)
    if (t.phase == TaskPhase::Running && t.workstation == w && t.start <= clock_ && clock_ < t.finish)
      level += instance_.find_task(t.task)->capacity_weight;
  return level;
}

void Simulator::emit(std::vector<SimEvent>& out, int k, std::string kind, std::string subject, std::string message) {
  out.push_back({k, std::move(kind), std::move(subject), std::move(message)});
}

void Simulator::record_snapshot() { history_.push_back(pos_); }

namespace {

// Orders candidate units so that those the plan moves the same way come
// first, then by instance order.
void prefer(std::vector<std::string>& units, const std::function<bool(const std::string&)>& planned) {
  std::stable_partition(units.begin(), units.end(), planned);
}

}  // namespace

void Simulator::apply_starts(int k, std::vector<SimEvent>& out) {
  std::set<std::string> reserved;
  for (const auto& t : tasks_)
    if (t.phase == TaskPhase::Running && t.start == k)
      for (const auto& u : consumed_[t.task]) reserved.insert(u);

  for (auto& state : tasks_) {
    if (state.phase != TaskPhase::Pending) continue;
    const TaskPlan* planned = plan_.find_task(state.task);
    if (!planned || planned->start < 0 || planned->start > k) continue;
    const TaskSpec& spec = *instance_.find_task(state.task);
    const WorkstationId w = planned->workstation;

    std::string reason;
    for (const auto& d : instance_.dependencies) {
      if (d.successor != spec.id) continue;
      const auto& pred = tasks_[instance_.task_index(d.predecessor)];
      if (d.kind == DependencyKind::FinishToStart && !(pred.phase == TaskPhase::Done && pred.finish <= k))
        reason = "predecessor " + d.predecessor + " has not finished";
      if (d.kind == DependencyKind::StartToStart && pred.phase == TaskPhase::Pending)
        reason = "predecessor " + d.predecessor + " has not started";
    }
    if (reason.empty() && down_at(w, k)) reason = "workstation " + std::to_string(w) + " is down";
    const auto* ws = instance_.find_workstation(w);
    if (reason.empty() && occupancy(w) + spec.capacity_weight > ws->occupancy_max + 1e-9)
      reason = "workstation " + std::to_string(w) + " is full";

    std::vector<std::string> chosen;
    if (reason.empty()) {
      for (const auto& [type, qty] : spec.inputs) {
        std::vector<std::string> pool;
        for (const auto& u : units_at(type, w))
          if (!reserved.count(u) && !unit_unavailable(u, k, k + 1)) pool.push_back(u);
        prefer(pool, [&](const std::string& u) {
          const Position* next = planned_position(u, k + 1);
          return next && !next->moving && next->node == kStorageNode;
        });
        if (static_cast<int>(pool.size()) < qty) {
          reason = "missing input " + type + " at workstation " + std::to_string(w);
          break;
        }
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + qty);
      }
    }
    if (!reason.empty()) {
      if (!blocked_.count(spec.id)) emit(out, k, "blocked", spec.id, "cannot start: " + reason);
      blocked_.insert(spec.id);
      continue;
    }
    blocked_.erase(spec.id);
    for (const auto& u : chosen) reserved.insert(u);
    consumed_[spec.id] = chosen;
    state.phase = TaskPhase::Running;
    state.start = k;
    state.workstation = w;
    state.finish = k + spec.duration + (extra_.count(spec.id) ? extra_.at(spec.id) : 0);
    emit(out, k, "start", spec.id,
         "at workstation " + std::to_string(w) + (k != planned->start ? " (planned " + std::to_string(planned->start) + ")" : ""));
  }
}

std::vector<std::pair<std::string, WorkstationId>> Simulator::credit_units(int k) const {
  std::vector<std::pair<std::string, WorkstationId>> out;
  std::set<std::string> taken;
  for (const auto& [task, units] : held_)
    for (const auto& u : units) taken.insert(u);
  for (const auto& c : credits_) taken.insert(c.resource);

  for (const auto& state : tasks_) {
    if (state.phase != TaskPhase::Done || state.finish != k) continue;
    const TaskSpec& spec = *instance_.find_task(state.task);
    const WorkstationId w = state.workstation;
    if (auto it = held_.find(state.task); it != held_.end())
      for (const auto& u : it->second) out.push_back({u, w});
    for (const auto& [type, qty] : spec.outputs) {
      std::vector<std::string> pool;
      for (const auto& u : units_at(type, kStorageNode))
        if (!taken.count(u)) pool.push_back(u);
      prefer(pool, [&](const std::string& u) {
        const Position* next = planned_position(u, k + 1);
        return next && !next->moving && next->node == w;
      });
      for (int q = 0; q < qty && q < static_cast<int>(pool.size()); ++q) {
        out.push_back({pool[q], w});
        taken.insert(pool[q]);
      }
    }
  }
  return out;
}

std::vector<SimEvent> Simulator::step() {
  if (finished()) throw Error("the simulation has reached the end of the horizon");
  const int k = clock_;
  std::vector<SimEvent> out;
  auto next = pos_;

  // Outputs of tasks finishing at k and pending credits appear at k+1.
  for (const auto& [unit, w] : credit_units(k)) {
    next[unit] = Position{};
    next[unit].node = w;
    emit(out, k + 1, "credit", unit, "to workstation " + std::to_string(w));
  }
  for (const auto& state : tasks_)
    if (state.phase == TaskPhase::Done && state.finish == k) held_.erase(state.task);
  for (auto it = credits_.begin(); it != credits_.end();) {
    if (it->arrival == k + 1) {
      next[it->resource] = Position{};
      next[it->resource].node = it->to;
      emit(out, k + 1, "credit", it->resource, "to workstation " + std::to_string(it->to));
      it = credits_.erase(it);
    } else {
      ++it;
    }
  }

  // Inputs of tasks started at k leave for storage; instruments are held.
  std::set<std::string> leaving;
  for (const auto& state : tasks_) {
    if (state.phase == TaskPhase::Pending || state.start != k) continue;
    for (const auto& u : consumed_[state.task]) {
      leaving.insert(u);
      next[u] = Position{};
      const auto* r = instance_.find_resource(u);
      if (r->category == ResourceCategory::Instrument) held_[state.task].push_back(u);
      emit(out, k + 1, "consume", u, "by " + state.task);
    }
  }

  // Departures planned at k.
  for (const auto& d : plan_.departures) {
    if (d.step != k) continue;
    const auto& vp = pos_.at(d.vehicle);
    const auto* veh = instance_.find_resource(d.vehicle);
    const bool edge_ok = std::find(instance_.edges.begin(), instance_.edges.end(),
                                   Edge{std::min(d.from, d.to), std::max(d.from, d.to)}) != instance_.edges.end();
    if (vp.moving || vp.node != d.from || !edge_ok) {
      emit(out, k, "blocked", d.vehicle, "cannot depart from " + std::to_string(d.from) + ": it is at " + describe(vp));
      continue;
    }
    const int n = vehicle_steps(d.vehicle);
    Trip trip{d.vehicle, d.from, d.to, k, n, {}};
    const int cap = veh->carry_capacity.value_or(1);
    for (const auto& u : d.cargo) {
      const auto& up = pos_.at(u);
      std::string reason;
      if (up.moving || up.node != d.from) reason = "it is at " + describe(up);
      else if (leaving.count(u)) reason = "it is being consumed";
      else if (unit_unavailable(u, k, k + n)) reason = "it is unavailable";
      else if (static_cast<int>(trip.cargo.size()) >= cap) reason = "the vehicle is full";
      if (!reason.empty()) {
        emit(out, k, "blocked", u, "left behind by " + d.vehicle + ": " + reason);
        continue;
      }
      trip.cargo.push_back(u);
    }
    executed_.push_back({d.vehicle, k, d.from, d.to, k + n, trip.cargo});
    emit(out, k, "depart", d.vehicle, "from " + std::to_string(d.from) + " to " + std::to_string(d.to));
    trips_.push_back(std::move(trip));
  }

  // Advance every trip by one step.
  for (auto it = trips_.begin(); it != trips_.end();) {
    const int j = k + 1 - it->depart;
    if (j >= it->steps) {
      next[it->vehicle] = Position{};
      next[it->vehicle].node = it->to;
      for (const auto& u : it->cargo) {
        next[u] = Position{};
        next[u].node = it->to;
      }
      emit(out, k + 1, "arrive", it->vehicle, "at " + std::to_string(it->to));
      it = trips_.erase(it);
      continue;
    }
    next[it->vehicle] = edge_position(it->from, it->to, j, it->steps);
    for (const auto& u : it->cargo) {
      next[u] = edge_position(it->from, it->to, j, it->steps);
      next[u].carrier = it->vehicle;
    }
    ++it;
  }

  pos_ = std::move(next);
  clock_ = k + 1;
  for (auto& state : tasks_)
    if (state.phase == TaskPhase::Running && state.finish <= clock_) {
      state.phase = TaskPhase::Done;
      emit(out, clock_, "finish", state.task, "at workstation " + std::to_string(state.workstation));
    }
  apply_starts(clock_, out);
  record_snapshot();
  events_.insert(events_.end(), out.begin(), out.end());

  if (options_.auto_replan && !finished() && !detect_deviation().empty()) replan();
  return out;
}

void Simulator::run(int steps) {
  for (int i = 0; i < steps && !finished(); ++i) step();
}

void Simulator::run_to_end() {
  while (!finished()) step();
}

void Simulator::inject(const AnomalyEvent& e) {
  const int k = clock_;
  std::string subject = e.target;
  switch (e.kind) {
    case AnomalyKind::TaskDelay: {
      const int t = instance_.task_index(e.target);
      if (t < 0) throw Error("unknown task " + e.target);
      if (e.steps <= 0) throw Error("a task delay needs a positive number of steps");
      auto& state = tasks_[t];
      if (state.phase == TaskPhase::Done) throw Error("task " + e.target + " has already finished");
      extra_[e.target] += e.steps;
      if (state.phase == TaskPhase::Running) state.finish += e.steps;
      break;
    }
    case AnomalyKind::VehicleSlowdown: {
      const auto* v = instance_.find_resource(e.target);
      if (!v || !v->is_vehicle()) throw Error("unknown vehicle " + e.target);
      if (!(e.factor > 0.0)) throw Error("a slowdown factor must be positive");
      auto [it, inserted] = speed_.emplace(e.target, 1.0);
      it->second *= e.factor;
      break;
    }
    case AnomalyKind::ResourceUnavailable: {
      const auto* r = instance_.find_resource(e.target);
      if (!r || r->is_vehicle()) throw Error("unknown resource " + e.target);
      if (e.window.to <= e.window.from) throw Error("an unavailability window must not be empty");
      unavailable_[e.target].push_back({std::max(e.window.from, k), e.window.to});
      break;
    }
    case AnomalyKind::WorkstationDown: {
      if (!instance_.find_workstation(e.workstation)) throw Error("unknown workstation " + std::to_string(e.workstation));
      if (e.window.to <= e.window.from) throw Error("a down window must not be empty");
      down_[e.workstation].push_back({std::max(e.window.from, k), e.window.to});
      subject = std::to_string(e.workstation);
      break;
    }
  }
  anomalies_.push_back(e);
  events_.push_back({k, "anomaly", subject, anomaly_to_json(e).dump()});
  if (options_.auto_replan && !finished() && !detect_deviation().empty()) replan();
}

std::vector<Deviation> Simulator::detect_deviation() const {
  std::vector<Deviation> out;
  const int k = clock_;
  for (const auto& state : tasks_) {
    const TaskPlan* p = plan_.find_task(state.task);
    if (!p) continue;
    if (state.phase == TaskPhase::Pending) {
      if (p->start >= 0 && p->start <= k)
        out.push_back({"task", state.task, "planned to start at " + std::to_string(p->start) + " but has not started"});
      continue;
    }
    if (state.start != p->start)
      out.push_back({"task", state.task,
                     "started at " + std::to_string(state.start) + " instead of " + std::to_string(p->start)});
    else if (state.finish != p->finish)
      out.push_back({"task", state.task,
                     "finishes at " + std::to_string(state.finish) + " instead of " + std::to_string(p->finish)});
  }
  for (const auto& r : instance_.resources) {
    const Position* want = k < planned_until_ ? planned_position(r.id, k) : nullptr;
    if (!want) continue;
    const auto& have = pos_.at(r.id);
    if (!same_place(*want, have))
      out.push_back({"position", r.id, "is at " + describe(have) + ", planned " + describe(*want)});
  }
  return out;
}

int Simulator::default_window() const {
  const int k = clock_;
  const int remaining = instance_.horizon - k;
  // Longest chain of remaining work along dependencies.
  std::map<std::string, int> length;
  for (const auto& state : tasks_) {
    const auto& spec = *instance_.find_task(state.task);
    int d = 0;
    if (state.phase == TaskPhase::Running) d = state.finish - k;
    else if (state.phase == TaskPhase::Pending) d = spec.duration + (extra_.count(spec.id) ? extra_.at(spec.id) : 0);
    length[state.task] = d;
  }
  std::map<std::string, int> best = length;
  for (std::size_t pass = 0; pass < instance_.tasks.size(); ++pass)
    for (const auto& d : instance_.dependencies)
      best[d.successor] = std::max(best[d.successor], best[d.predecessor] + length[d.successor]);
  int chain = 0;
  for (const auto& [id, v] : best) chain = std::max(chain, v);

  // Graph diameter in hops times the slowest trip.
  int diameter = 0;
  for (const auto& src : instance_.workstations) {
    std::map<WorkstationId, int> dist{{src.id, 0}};
    std::deque<WorkstationId> queue{src.id};
    while (!queue.empty()) {
      const WorkstationId u = queue.front();
      queue.pop_front();
      for (const auto& e : instance_.edges) {
        const WorkstationId v = e.from == u ? e.to : e.to == u ? e.from : -1;
        if (v >= 0 && !dist.count(v)) {
          dist[v] = dist[u] + 1;
          diameter = std::max(diameter, dist[v]);
          queue.push_back(v);
        }
      }
    }
  }
  int slowest = 0;
  for (const auto& r : instance_.resources)
    if (r.is_vehicle()) slowest = std::max(slowest, vehicle_steps(r.id));

  int window = 2 * (chain + diameter * slowest);
  window = std::max(window, 2);
  if (options_.max_window > 0) window = std::min(window, options_.max_window);
  return std::min(window, remaining);
}

ProblemInstance Simulator::residual_instance(std::optional<int> window) const {
  const int k = clock_;
  if (k >= instance_.horizon - 1) throw Error("nothing is left to plan at the end of the horizon");
  int W = window.value_or(default_window());
  if (W < 1) throw Error("a replanning window must be positive");
  W = std::min(W, instance_.horizon - k);
  // The window covers running work and everything still in flight.
  int reach = 0;
  for (const auto& state : tasks_)
    if (state.phase == TaskPhase::Running) reach = std::max(reach, state.finish - k + 1);
  for (const auto& trip : trips_) reach = std::max(reach, trip.depart + trip.steps - k + 1);
  for (const auto& c : credits_) reach = std::max(reach, c.arrival - k + 1);
  W = std::min(std::max(W, reach), instance_.horizon - k);

  ProblemInstance res;
  res.name = instance_.name + "@" + std::to_string(k);
  res.horizon = W;
  res.sampling_time = instance_.sampling_time;
  res.objective = instance_.objective;
  res.edges = instance_.edges;

  std::map<WorkstationId, int> pinned_until;
  std::set<std::string> kept;
  for (const auto& state : tasks_) {
    if (state.phase == TaskPhase::Done) continue;
    TaskSpec t = *instance_.find_task(state.task);
    const int extra = extra_.count(t.id) ? extra_.at(t.id) : 0;
    if (state.phase == TaskPhase::Running) {
      t.duration = state.finish - k;
      t.earliest_start = 0;
      t.latest_finish = t.duration;
      t.eligible_workstations = {state.workstation};
      if (state.start < k) {
        t.inputs.clear();
        if (auto it = held_.find(t.id); it != held_.end())
          for (const auto& u : it->second) t.outputs[instance_.find_resource(u)->resource_type] += 1;
      }
      pinned_until[state.workstation] = std::max(pinned_until[state.workstation], t.duration);
    } else {
      t.duration += extra;
      t.earliest_start = std::max(t.earliest_start - k, 0);
      t.latest_finish = std::min(t.latest_finish - k, W);
    }
    kept.insert(t.id);
    res.tasks.push_back(std::move(t));
  }
  for (const auto& d : instance_.dependencies)
    if (kept.count(d.predecessor) && kept.count(d.successor)) res.dependencies.push_back(d);

  // Units credited at k+1 enter the residual as pending credits.
  std::map<std::string, std::pair<WorkstationId, int>> arriving;
  for (const auto& [unit, w] : credit_units(k)) arriving[unit] = {w, 1};
  for (const auto& c : credits_) arriving[c.resource] = {c.to, c.arrival - k};

  for (const auto& r : instance_.resources) {
    ResourceSpec s = r;
    s.transit.reset();
    s.unavailable = shifted(unavailable_.at(r.id), k, W);
    if (r.is_vehicle()) {
      if (auto it = speed_.find(r.id); it != speed_.end()) s.velocity = r.velocity.value_or(1.0) * it->second;
    }
    const Position& p = pos_.at(r.id);
    if (auto it = arriving.find(r.id); it != arriving.end()) {
      s.initial_location = kStorageNode;
      s.transit = Transit{kStorageNode, it->second.first, it->second.second, ""};
    } else if (!p.moving) {
      s.initial_location = p.node;
    } else {
      for (const auto& trip : trips_) {
        const bool mine = trip.vehicle == r.id || std::find(trip.cargo.begin(), trip.cargo.end(), r.id) != trip.cargo.end();
        if (!mine) continue;
        s.initial_location = kStorageNode;
        s.transit = Transit{trip.from, trip.to, trip.depart + trip.steps - k, r.is_vehicle() ? "" : trip.vehicle};
      }
    }
    res.resources.push_back(std::move(s));
  }

  for (const auto& w : instance_.workstations) {
    WorkstationSpec s = w;
    s.initial_buffer.clear();
    s.down.clear();
    const int busy = pinned_until.count(w.id) ? pinned_until.at(w.id) : 0;
    for (auto win : shifted(down_.at(w.id), k, W)) {
      // Work already under way finishes; the outage starts after it.
      win.from = std::max(win.from, busy);
      if (win.to > win.from) s.down.push_back(win);
    }
    res.workstations.push_back(std::move(s));
  }
  return res;
}

ReplanResult Simulator::replan(std::optional<int> window, const std::optional<SolveParams>& params) {
  ReplanResult result;
  const int k = clock_;
  result.clock = k;
  result.residual = residual_instance(window);
  result.window = result.residual.horizon;
  if (auto v = validate(result.residual); !v.empty()) {
    result.message = "residual instance is invalid: " + v.front().message;
    events_.push_back({k, "replan", result.residual.name, result.message});
    return result;
  }
  const Encoding enc = encode(result.residual);
  result.solution = solve_milp(enc.model, params.value_or(options_.solve));
  if (!result.solution.has_solution()) {
    result.message = std::string("no schedule found (") + to_string(result.solution.status) + ")";
    events_.push_back({k, "replan", result.residual.name, result.message});
    return result;
  }
  result.schedule = decode_schedule(result.solution, enc, result.residual);

  // Splice: executed history up to k, then the residual schedule.
  Schedule merged;
  merged.instance = instance_.name;
  merged.status = result.schedule.status;
  merged.horizon = instance_.horizon;
  merged.objective = result.solution.objective;
  for (const auto& state : tasks_) {
    const TaskPlan* r = result.schedule.find_task(state.task);
    TaskPlan p;
    p.task = state.task;
    if (state.phase == TaskPhase::Done) {
      p.start = state.start;
      p.finish = state.finish;
      p.workstation = state.workstation;
    } else if (state.phase == TaskPhase::Running) {
      p.start = state.start;
      p.finish = r ? r->finish + k : state.finish;
      p.workstation = state.workstation;
    } else if (r) {
      p.start = r->start + k;
      p.finish = r->finish + k;
      p.workstation = r->workstation;
    } else {
      continue;
    }
    merged.makespan = std::max(merged.makespan, p.finish);
    merged.tasks.push_back(p);
  }
  for (const auto& d : executed_) merged.departures.push_back(d);
  for (auto d : result.schedule.departures) {
    d.step += k;
    d.arrival += k;
    merged.departures.push_back(std::move(d));
  }
  auto splice = [&](const std::vector<Track>& fresh, std::vector<Track>& into, bool vehicles) {
    for (const auto& r : instance_.resources) {
      if (r.is_vehicle() != vehicles) continue;
      Track t;
      t.resource = r.id;
      for (int s = 0; s < k; ++s) t.steps.push_back(history_[s].at(r.id));
      const Track* f = nullptr;
      for (const auto& x : fresh)
        if (x.resource == r.id) f = &x;
      for (int s = 0; k + s < instance_.horizon; ++s) {
        if (f && s < static_cast<int>(f->steps.size()))
          t.steps.push_back(s == 0 ? history_[k].at(r.id) : f->steps[s]);
        else
          t.steps.push_back(t.steps.back());
      }
      into.push_back(std::move(t));
    }
  };
  splice(result.schedule.vehicles, merged.vehicles, true);
  splice(result.schedule.resources, merged.resources, false);
  fill_series(merged, instance_);
  plan_ = std::move(merged);
  planned_until_ = k + result.window;
  blocked_.clear();
  result.applied = true;
  result.message = "replanned " + std::to_string(result.window) + " steps, objective " + std::to_string(result.solution.objective);
  events_.push_back({k, "replan", result.residual.name, result.message});
  return result;
}

Schedule Simulator::trajectory() const {
  Schedule s;
  s.instance = instance_.name;
  s.status = "executed";
  s.horizon = instance_.horizon;
  for (const auto& state : tasks_) {
    if (state.phase == TaskPhase::Pending) continue;
    s.tasks.push_back({state.task, state.start, state.finish, state.workstation});
    s.makespan = std::max(s.makespan, state.finish);
  }
  s.departures = executed_;
  for (const auto& r : instance_.resources) {
    Track t;
    t.resource = r.id;
    for (const auto& snap : history_) t.steps.push_back(snap.at(r.id));
    (r.is_vehicle() ? s.vehicles : s.resources).push_back(std::move(t));
  }
  fill_series(s, instance_);
  return s;
}

json Simulator::state_json() const {
  json tasks = json::array();
  for (const auto& t : tasks_) {
    json j = {{"id", t.task}, {"phase", to_string(t.phase)}};
    if (t.phase != TaskPhase::Pending) {
      j["start"] = t.start;
      j["finish"] = t.finish;
      j["workstation"] = t.workstation;
    }
    tasks.push_back(j);
  }
  json positions = json::object();
  for (const auto& [id, p] : pos_) positions[id] = position_to_json(p);
  json buffers = json::array();
  json occ = json::array();
  for (const auto& w : instance_.workstations) {
    for (const auto& type : instance_.resource_types()) {
      int level = 0;
      for (const auto& r : instance_.resources) {
        if (r.is_vehicle() || r.resource_type != type) continue;
        const auto& p = pos_.at(r.id);
        level += !p.moving && p.node == w.id;
      }
      buffers.push_back({{"workstation", w.id}, {"resource_type", type}, {"level", level}});
    }
    occ.push_back({{"workstation", w.id}, {"level", occupancy(w.id)}});
  }
  json devs = json::array();
  for (const auto& d : detect_deviation())
    devs.push_back({{"kind", d.kind}, {"subject", d.subject}, {"message", d.message}});
  json anomalies = json::array();
  for (const auto& a : anomalies_) anomalies.push_back(anomaly_to_json(a));
  return {{"clock", clock_},       {"horizon", instance_.horizon}, {"finished", finished()},
          {"planned_until", planned_until_},
          {"tasks", tasks},        {"positions", positions},       {"buffers", buffers},
          {"occupancy", occ},      {"deviations", devs},           {"anomalies", anomalies}};
}

std::string Simulator::trace_ndjson() const {
  std::ostringstream out;
  const Schedule traj = trajectory();
  std::vector<SimEvent> events = events_;
  std::stable_sort(events.begin(), events.end(), [](const SimEvent& a, const SimEvent& b) { return a.step < b.step; });
  auto event_line = [&](const SimEvent& ev) {
    out << json{{"type", "event"}, {"step", ev.step}, {"kind", ev.kind}, {"subject", ev.subject}, {"message", ev.message}}
               .dump()
        << "\n";
  };
  std::size_t e = 0;
  for (int s = 0; s <= clock_; ++s) {
    for (; e < events.size() && events[e].step <= s; ++e) event_line(events[e]);
    json positions = json::object();
    for (const auto* list : {&traj.vehicles, &traj.resources})
      for (const auto& t : *list) positions[t.resource] = position_to_json(t.steps[s]);
    json occ = json::object();
    for (const auto& o : traj.occupancy) occ[std::to_string(o.workstation)] = o.values[s];
    out << json{{"type", "state"}, {"step", s}, {"positions", positions}, {"occupancy", occ}}.dump() << "\n";
  }
  for (; e < events.size(); ++e) event_line(events[e]);
  return out.str();
}

}  // namespace linea
