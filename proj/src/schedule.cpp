#include "linea/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace linea {

using nlohmann::json;

const TaskPlan* Schedule::find_task(const std::string& id) const {
  for (const auto& t : tasks)
    if (t.task == id) return &t;
  return nullptr;
}

const Track* Schedule::find_track(const std::string& resource) const {
  for (const auto* list : {&vehicles, &resources})
    for (const auto& t : *list)
      if (t.resource == resource) return &t;
  return nullptr;
}

namespace {

// Snaps values that are integral up to solver noise and trims the rest to a
// fixed number of decimals, so decoded documents are stable across solves.
double clean(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-6) return r == 0.0 ? 0.0 : r;
  return std::round(v * 1e9) / 1e9;
}

}  // namespace

Position edge_position(WorkstationId from, WorkstationId to, int j, int n) {
  Position p;
  p.moving = true;
  p.node = 0;
  p.from = std::min(from, to);
  p.to = std::max(from, to);
  const double done = static_cast<double>(j) / n;
  p.progress = clean(from < to ? done : 1.0 - done);
  p.heading = to;
  return p;
}

namespace {

class Decoder {
 public:
  Decoder(const MILPSolution& sol, const Encoding& enc, const ProblemInstance& inst, double tol)
      : sol_(sol), enc_(enc), inst_(inst), tol_(tol) {}

  Schedule run() {
    if (!sol_.has_solution()) throw Error("decode_schedule: the solution holds no point");
    if (static_cast<int>(sol_.x.size()) != enc_.model.num_columns())
      throw Error("decode_schedule: solution size does not match the encoding");
    for (int j = 0; j < enc_.model.num_columns(); ++j) {
      if (enc_.model.column(j).kind != ColumnKind::Binary) continue;
      const double v = sol_.x[j];
      if (std::min(std::abs(v), std::abs(v - 1.0)) > tol_)
        throw Error("decode_schedule: binary " + enc_.model.column(j).name + " is fractional (" + std::to_string(v) + ")");
    }
    K_ = inst_.horizon;
    out_.instance = inst_.name;
    out_.status = to_string(sol_.status);
    out_.horizon = K_;
    out_.objective = sol_.objective;
    decode_tasks();
    decode_vehicles();
    decode_units();
    decode_series();
    return std::move(out_);
  }

 private:
  bool on(const VarKey& key) const {
    const int j = enc_.catalog.find(key);
    return j >= 0 && sol_.x[j] > 0.5;
  }
  double value(const VarKey& key) const {
    const int j = enc_.catalog.find(key);
    return j >= 0 ? sol_.x[j] : 0.0;
  }

  void decode_tasks() {
    for (int t = 0; t < static_cast<int>(inst_.tasks.size()); ++t) {
      const auto& task = inst_.tasks[t];
      TaskPlan plan;
      plan.task = task.id;
      for (auto w : task.eligible_workstations)
        for (int k = task.earliest_start; k < K_; ++k)
          if (on({Family::Assign, t, w, k})) {
            plan.start = k;
            plan.workstation = w;
          }
      if (plan.start < 0) throw Error("decode_schedule: task " + task.id + " has no start");
      plan.finish = plan.start + task.duration;
      out_.makespan = std::max(out_.makespan, plan.finish);
      out_.tasks.push_back(plan);
    }
  }

  Position node_position(int x, int k, bool with_storage) const {
    Position p;
    std::vector<WorkstationId> nodes;
    for (const auto& w : inst_.workstations) nodes.push_back(w.id);
    if (with_storage) nodes.push_back(kStorageNode);
    for (auto w : nodes)
      if (value({Family::Location, x, k, w, w}) > 0.5) {
        p.node = w;
        return p;
      }
    p.node = -1;
    return p;
  }

  // Position on edge e after `j` of `n` steps, travelling in direction `dir`.
  Position on_edge(int e, int dir, int j, int n) const {
    const Edge& edge = inst_.edges[e];
    return dir == kForward ? edge_position(edge.from, edge.to, j, n) : edge_position(edge.to, edge.from, j, n);
  }

  Position transit_position(const ResourceSpec& r, int k, int n) const {
    const auto& tr = *r.transit;
    Position p = edge_position(tr.from, tr.to, std::max(n - (tr.arrival_step - k), 0), n);
    p.carrier = tr.carrier;
    return p;
  }

  void decode_vehicles() {
    const int E = static_cast<int>(inst_.edges.size());
    for (int v = 0; v < static_cast<int>(inst_.resources.size()); ++v) {
      const auto& veh = inst_.resources[v];
      if (!veh.is_vehicle()) continue;
      const int n = travel_steps(inst_, veh);
      Track track;
      track.resource = veh.id;
      for (int k = 0; k < K_; ++k) {
        Position p = node_position(v, k, false);
        if (p.node < 0) {
          if (veh.transit && k < veh.transit->arrival_step) {
            p = transit_position(veh, k, n);
            p.carrier.clear();
          } else {
            for (int e = 0; e < E; ++e)
              for (int j = 1; j < n; ++j) {
                if (on({Family::DepartFwd, v, k - j, e})) p = on_edge(e, kForward, j, n);
                if (on({Family::DepartBwd, v, k - j, e})) p = on_edge(e, kBackward, j, n);
              }
          }
          if (!p.moving) throw Error("decode_schedule: vehicle " + veh.id + " has no location at step " + std::to_string(k));
        }
        track.steps.push_back(p);
      }
      out_.vehicles.push_back(std::move(track));

      for (int k = 0; k < K_; ++k)
        for (int e = 0; e < E; ++e)
          for (int dir : {kForward, kBackward}) {
            if (!on({dir == kForward ? Family::DepartFwd : Family::DepartBwd, v, k, e})) continue;
            Departure d;
            d.vehicle = veh.id;
            d.step = k;
            d.from = dir == kForward ? inst_.edges[e].from : inst_.edges[e].to;
            d.to = dir == kForward ? inst_.edges[e].to : inst_.edges[e].from;
            d.arrival = k + n;
            for (int r = 0; r < static_cast<int>(inst_.resources.size()); ++r)
              if (on({Family::Ride, r, v, k, e, dir})) d.cargo.push_back(inst_.resources[r].id);
            out_.departures.push_back(std::move(d));
          }
    }
  }

  void decode_units() {
    const int E = static_cast<int>(inst_.edges.size());
    for (int r = 0; r < static_cast<int>(inst_.resources.size()); ++r) {
      const auto& unit = inst_.resources[r];
      if (unit.is_vehicle()) continue;
      Track track;
      track.resource = unit.id;
      for (int k = 0; k < K_; ++k) {
        Position p = node_position(r, k, true);
        if (p.node < 0 && unit.transit && unit.transit->from == kStorageNode && k < unit.transit->arrival_step)
          p.node = kStorageNode;
        if (p.node < 0) {
          for (int v = 0; v < static_cast<int>(inst_.resources.size()); ++v) {
            if (!inst_.resources[v].is_vehicle()) continue;
            const int n = travel_steps(inst_, inst_.resources[v]);
            if (unit.transit && unit.transit->carrier == inst_.resources[v].id && k < unit.transit->arrival_step)
              p = transit_position(unit, k, n);
            for (int e = 0; e < E; ++e)
              for (int j = 1; j < n; ++j)
                for (int dir : {kForward, kBackward})
                  if (on({Family::Ride, r, v, k - j, e, dir})) {
                    p = on_edge(e, dir, j, n);
                    p.carrier = inst_.resources[v].id;
                  }
          }
          if (!p.moving) throw Error("decode_schedule: resource " + unit.id + " has no location at step " + std::to_string(k));
        }
        track.steps.push_back(p);
      }
      out_.resources.push_back(std::move(track));
    }
  }

  void decode_series() {
    const auto types = inst_.resource_types();
    for (const auto& ws : inst_.workstations) {
      for (int ty = 0; ty < static_cast<int>(types.size()); ++ty) {
        Series s;
        s.workstation = ws.id;
        s.resource_type = types[ty];
        for (int k = 0; k < K_; ++k) s.values.push_back(clean(value({Family::Buffer, ws.id, k, ty})));
        out_.buffers.push_back(std::move(s));
      }
      Series o;
      o.workstation = ws.id;
      for (int k = 0; k < K_; ++k) o.values.push_back(clean(value({Family::Occupancy, ws.id, k})));
      out_.occupancy.push_back(std::move(o));
    }
  }

  const MILPSolution& sol_;
  const Encoding& enc_;
  const ProblemInstance& inst_;
  double tol_;
  int K_ = 0;
  Schedule out_;
};

}  // namespace

json position_to_json(const Position& p) {
  if (!p.moving) return {{"node", p.node}};
  json j = {{"edge", {p.from, p.to}}, {"progress", p.progress}, {"heading", p.heading}};
  if (!p.carrier.empty()) j["carrier"] = p.carrier;
  return j;
}

Position position_from_json(const json& j) {
  Position p;
  if (j.contains("node")) {
    p.node = j.at("node").get<int>();
    return p;
  }
  p.moving = true;
  p.node = 0;
  p.from = j.at("edge").at(0).get<int>();
  p.to = j.at("edge").at(1).get<int>();
  p.progress = j.at("progress").get<double>();
  p.heading = j.at("heading").get<int>();
  p.carrier = j.value("carrier", std::string());
  return p;
}

void fill_series(Schedule& s, const ProblemInstance& inst) {
  s.buffers.clear();
  s.occupancy.clear();
  int steps = 0;
  for (const auto* list : {&s.vehicles, &s.resources})
    for (const auto& t : *list) steps = std::max(steps, static_cast<int>(t.steps.size()));
  if (s.vehicles.empty() && s.resources.empty()) steps = s.horizon;
  for (const auto& ws : inst.workstations) {
    for (const auto& type : inst.resource_types()) {
      Series b;
      b.workstation = ws.id;
      b.resource_type = type;
      b.values.assign(steps, 0.0);
      for (const auto& t : s.resources) {
        const auto* r = inst.find_resource(t.resource);
        if (!r || r->resource_type != type) continue;
        for (int k = 0; k < static_cast<int>(t.steps.size()); ++k)
          if (!t.steps[k].moving && t.steps[k].node == ws.id) b.values[k] += 1.0;
      }
      s.buffers.push_back(std::move(b));
    }
    Series o;
    o.workstation = ws.id;
    o.values.assign(steps, 0.0);
    for (const auto& p : s.tasks) {
      const auto* t = inst.find_task(p.task);
      if (!t || p.workstation != ws.id) continue;
      for (int k = std::max(p.start, 0); k < p.finish && k < steps; ++k) o.values[k] += t->capacity_weight;
    }
    s.occupancy.push_back(std::move(o));
  }
}

namespace {

json tracks_to_json(const std::vector<Track>& tracks) {
  json out = json::array();
  for (const auto& t : tracks) {
    json steps = json::array();
    for (const auto& p : t.steps) steps.push_back(position_to_json(p));
    out.push_back({{"id", t.resource}, {"steps", steps}});
  }
  return out;
}

std::vector<Track> tracks_from_json(const json& j) {
  std::vector<Track> out;
  for (const auto& t : j) {
    Track track;
    track.resource = t.at("id").get<std::string>();
    for (const auto& p : t.at("steps")) track.steps.push_back(position_from_json(p));
    out.push_back(std::move(track));
  }
  return out;
}

}  // namespace

Schedule decode_schedule(const MILPSolution& solution, const Encoding& encoding, const ProblemInstance& instance,
                         double tolerance) {
  return Decoder(solution, encoding, instance, tolerance).run();
}

json schedule_to_json(const Schedule& s) {
  json tasks = json::array();
  for (const auto& t : s.tasks)
    tasks.push_back({{"id", t.task}, {"start", t.start}, {"finish", t.finish}, {"workstation", t.workstation}});
  json deps = json::array();
  for (const auto& d : s.departures)
    deps.push_back({{"vehicle", d.vehicle},
                    {"step", d.step},
                    {"from", d.from},
                    {"to", d.to},
                    {"arrival", d.arrival},
                    {"cargo", d.cargo}});
  json buffers = json::array();
  for (const auto& b : s.buffers)
    buffers.push_back({{"workstation", b.workstation}, {"resource_type", b.resource_type}, {"levels", b.values}});
  json occupancy = json::array();
  json nodes = json::array({{{"id", kStorageNode}, {"storage", true}}});
  for (const auto& o : s.occupancy) {
    occupancy.push_back({{"workstation", o.workstation}, {"levels", o.values}});
    nodes.push_back({{"id", o.workstation}, {"storage", false}});
  }
  return {{"instance", s.instance},     {"status", s.status},          {"horizon", s.horizon},
          {"objective", s.objective},   {"makespan", s.makespan},      {"tasks", tasks},
          {"departures", deps},         {"vehicles", tracks_to_json(s.vehicles)},
          {"resources", tracks_to_json(s.resources)},                  {"buffers", buffers},
          {"occupancy", occupancy},     {"nodes", nodes}};
}

Schedule schedule_from_json(const json& doc) {
  try {
    Schedule s;
    s.instance = doc.at("instance").get<std::string>();
    s.status = doc.value("status", std::string());
    s.horizon = doc.at("horizon").get<int>();
    s.objective = doc.value("objective", 0.0);
    s.makespan = doc.at("makespan").get<int>();
    for (const auto& t : doc.at("tasks"))
      s.tasks.push_back({t.at("id").get<std::string>(), t.at("start").get<int>(), t.at("finish").get<int>(),
                         t.at("workstation").get<int>()});
    for (const auto& d : doc.value("departures", json::array()))
      s.departures.push_back({d.at("vehicle").get<std::string>(), d.at("step").get<int>(), d.at("from").get<int>(),
                              d.at("to").get<int>(), d.at("arrival").get<int>(),
                              d.at("cargo").get<std::vector<std::string>>()});
    s.vehicles = tracks_from_json(doc.value("vehicles", json::array()));
    s.resources = tracks_from_json(doc.value("resources", json::array()));
    for (const auto& b : doc.value("buffers", json::array()))
      s.buffers.push_back({b.at("workstation").get<int>(), b.at("resource_type").get<std::string>(),
                           b.at("levels").get<std::vector<double>>()});
    for (const auto& o : doc.value("occupancy", json::array()))
      s.occupancy.push_back({o.at("workstation").get<int>(), std::string(), o.at("levels").get<std::vector<double>>()});
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed schedule document: ") + e.what());
  }
}

std::string write_schedule_json(const Schedule& schedule) { return schedule_to_json(schedule).dump(2) + "\n"; }

Schedule read_schedule_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed schedule document: ") + e.what());
  }
  return schedule_from_json(doc);
}

// ---------------------------------------------------------------------------
// Independent checker.

namespace {

class Checker {
 public:
  Checker(const ProblemInstance& inst, const Schedule& s) : inst_(inst), s_(s), K_(inst.horizon) {}

  std::vector<CheckViolation> run() {
    if (s_.horizon != K_) add("state", "schedule horizon " + std::to_string(s_.horizon) + " differs from the instance");
    check_tasks();
    if (!out_.empty()) return out_;
    check_precedence();
    check_occupancy();
    if (check_tracks()) {
      check_motion();
      check_storage_transitions();
      check_buffers();
    }
    return out_;
  }

 private:
  void add(const std::string& rule, const std::string& message) { out_.push_back({rule, message}); }

  static std::string at(int k) { return " at step " + std::to_string(k); }

  void check_tasks() {
    std::set<std::string> seen;
    for (const auto& p : s_.tasks) {
      const TaskSpec* t = inst_.find_task(p.task);
      if (!t) {
        add("uniqueness", "unknown task " + p.task);
        continue;
      }
      if (!seen.insert(p.task).second) add("uniqueness", "task " + p.task + " is scheduled more than once");
      if (std::find(t->eligible_workstations.begin(), t->eligible_workstations.end(), p.workstation) ==
          t->eligible_workstations.end())
        add("uniqueness", "task " + p.task + " runs on ineligible workstation " + std::to_string(p.workstation));
      if (p.finish != p.start + t->duration) add("state", "task " + p.task + " finish is not start + duration");
      if (p.start < t->earliest_start) add("window", "task " + p.task + " starts before its earliest start");
      if (p.finish > t->latest_finish) add("window", "task " + p.task + " finishes after its deadline");
      if (p.start < 0 || p.start >= K_) add("window", "task " + p.task + " starts outside the horizon");
      if (const auto* ws = inst_.find_workstation(p.workstation))
        for (const auto& d : ws->down)
          if (p.start < d.to && d.from < p.finish) add("state", "task " + p.task + " executes while its workstation is down");
    }
    for (const auto& t : inst_.tasks)
      if (!seen.count(t.id)) add("uniqueness", "task " + t.id + " is not scheduled");
    int makespan = 0;
    for (const auto& p : s_.tasks) makespan = std::max(makespan, p.finish);
    if (makespan != s_.makespan) add("makespan", "makespan " + std::to_string(s_.makespan) + " is not the latest finish");
  }

  void check_precedence() {
    for (const auto& d : inst_.dependencies) {
      const auto* p = s_.find_task(d.predecessor);
      const auto* q = s_.find_task(d.successor);
      bool ok = true;
      switch (d.kind) {
        case DependencyKind::FinishToStart: ok = p->finish <= q->start; break;
        case DependencyKind::StartToStart: ok = p->start <= q->start; break;
        case DependencyKind::FinishToFinish: ok = p->finish <= q->finish; break;
        case DependencyKind::StartToFinish: ok = p->start <= q->finish; break;
      }
      if (!ok) add("precedence", to_string(d.kind) + " " + d.predecessor + " -> " + d.successor + " violated");
    }
  }

  void check_occupancy() {
    for (const auto& ws : inst_.workstations) {
      const Series* reported = nullptr;
      for (const auto& o : s_.occupancy)
        if (o.workstation == ws.id) reported = &o;
      for (int k = 0; k < K_; ++k) {
        double level = 0.0;
        for (const auto& p : s_.tasks)
          if (p.workstation == ws.id && p.start <= k && k < p.finish) level += inst_.find_task(p.task)->capacity_weight;
        if (level < ws.occupancy_min - 1e-9 || level > ws.occupancy_max + 1e-9)
          add("occupancy", "workstation " + std::to_string(ws.id) + " occupancy " + std::to_string(level) + at(k));
        if (reported && (static_cast<int>(reported->values.size()) != K_ || std::abs(reported->values[k] - level) > 1e-6))
          add("occupancy", "reported occupancy of workstation " + std::to_string(ws.id) + " is wrong" + at(k));
      }
    }
  }

  bool check_tracks() {
    bool ok = true;
    for (const auto& r : inst_.resources) {
      const Track* t = s_.find_track(r.id);
      if (!t || static_cast<int>(t->steps.size()) != K_) {
        add("resource", "resource " + r.id + " has no complete track");
        ok = false;
        continue;
      }
      for (int k = 0; k < K_; ++k) {
        const auto& p = t->steps[k];
        if (p.moving) {
          if (!has_edge(p.from, p.to) || (p.heading != p.from && p.heading != p.to) || p.progress < -1e-9 ||
              p.progress > 1 + 1e-9) {
            add("motion", "resource " + r.id + " is on an unknown edge" + at(k));
            ok = false;
          }
        } else if (!(p.node == kStorageNode && !r.is_vehicle()) && !inst_.find_workstation(p.node)) {
          add("resource", "resource " + r.id + " is at unknown node " + std::to_string(p.node) + at(k));
          ok = false;
        }
      }
      const auto& first = t->steps.empty() ? Position{} : t->steps[0];
      if (!t->steps.empty()) {
        if (r.transit && r.transit->from == kStorageNode) {
          if (first.moving || first.node != kStorageNode)
            add("resource", "resource " + r.id + " is somewhere before its pending credit");
        } else if (r.transit) {
          if (!first.moving || first.heading != r.transit->to)
            add("resource", "resource " + r.id + " does not start in transit toward " + std::to_string(r.transit->to));
        } else if (first.moving || first.node != r.initial_location) {
          add("resource", "resource " + r.id + " does not start at its initial location");
        }
      }
    }
    return ok;
  }

  bool has_edge(WorkstationId a, WorkstationId b) const {
    for (const auto& e : inst_.edges)
      if (e.from == a && e.to == b) return true;
    return false;
  }

  int travel(const std::string& vehicle) const {
    const auto* v = inst_.find_resource(vehicle);
    return v && v->is_vehicle() ? travel_steps(inst_, *v) : 1;
  }

  // Expected position `j` steps after leaving `from` toward `to` on an n-step edge.
  static Position expected(WorkstationId from, WorkstationId to, int j, int n) {
    Position p;
    p.moving = true;
    p.node = 0;
    p.from = std::min(from, to);
    p.to = std::max(from, to);
    const double done = static_cast<double>(j) / n;
    p.progress = from < to ? done : 1.0 - done;
    p.heading = to;
    return p;
  }

  static bool same_place(const Position& a, const Position& b) {
    if (a.moving != b.moving) return false;
    if (!a.moving) return a.node == b.node;
    return a.from == b.from && a.to == b.to && a.heading == b.heading && std::abs(a.progress - b.progress) <= 1e-6;
  }

  // Every change of position must be explained by a departure, a task start
  // (into storage) or a task finish (out of storage).
  void check_motion() {
    // explained[resource][k]: the k -> k+1 transition is covered by a departure.
    std::map<std::string, std::vector<char>> explained;
    for (const auto& r : inst_.resources) explained[r.id].assign(K_, 0);

    auto cover = [&](const std::string& id, const std::string& carrier, WorkstationId from, WorkstationId to, int k0,
                     int n, bool departing) {
      const Track* t = s_.find_track(id);
      if (departing && (t->steps[k0].moving || t->steps[k0].node != from)) {
        add("motion", id + " departs from " + std::to_string(from) + " without being there" + at(k0));
        return;
      }
      for (int j = 1; j <= n && k0 + j < K_; ++j) {
        const int k = k0 + j;
        Position want;
        if (j == n) {
          want.node = to;
        } else {
          want = expected(from, to, j, n);
        }
        if (!same_place(t->steps[k], want)) {
          add("motion", id + " is not where its trip puts it" + at(k));
          return;
        }
        if (j < n && !carrier.empty() && t->steps[k].carrier != carrier)
          add("motion", id + " is not carried by " + carrier + at(k));
        explained[id][k - 1] = 1;
      }
    };

    for (const auto& d : s_.departures) {
      const auto* v = inst_.find_resource(d.vehicle);
      if (!v || !v->is_vehicle()) {
        add("motion", "departure by unknown vehicle " + d.vehicle);
        continue;
      }
      const int n = travel_steps(inst_, *v);
      if (!has_edge(std::min(d.from, d.to), std::max(d.from, d.to)) || d.from == d.to) {
        add("motion", "vehicle " + d.vehicle + " departs along a missing edge");
        continue;
      }
      if (d.arrival != d.step + n || d.step < 0 || d.arrival > K_ - 1)
        add("motion", "vehicle " + d.vehicle + " trip from step " + std::to_string(d.step) + " does not fit the horizon");
      if (v->transit && d.step < v->transit->arrival_step) add("motion", "vehicle " + d.vehicle + " departs while in transit");
      if (static_cast<int>(d.cargo.size()) > v->carry_capacity.value_or(1))
        add("motion", "vehicle " + d.vehicle + " is over capacity" + at(d.step));
      cover(d.vehicle, std::string(), d.from, d.to, d.step, n, true);
      for (const auto& c : d.cargo) {
        const auto* u = inst_.find_resource(c);
        if (!u || u->is_vehicle()) {
          add("motion", "unknown cargo " + c);
          continue;
        }
        for (const auto& w : u->unavailable)
          if (d.step < w.to && w.from < d.step + n) add("resource", c + " is moved while unavailable" + at(d.step));
        cover(c, d.vehicle, d.from, d.to, d.step, n, true);
      }
    }
    for (const auto& r : inst_.resources) {
      if (!r.transit || r.transit->from == kStorageNode) continue;
      const int n = travel(r.transit->carrier.empty() ? r.id : r.transit->carrier);
      const int elapsed = n - r.transit->arrival_step;
      for (int k = 0; k < r.transit->arrival_step && k < K_; ++k) explained[r.id][k] = 1;
      const Track* t = s_.find_track(r.id);
      for (int k = 0; k <= r.transit->arrival_step && k < K_; ++k) {
        Position want;
        if (k == r.transit->arrival_step)
          want.node = r.transit->to;
        else
          want = expected(r.transit->from, r.transit->to, elapsed + k, n);
        if (!same_place(t->steps[k], want)) add("motion", r.id + " does not follow its initial transit" + at(k));
      }
    }

    for (const auto& r : inst_.resources) {
      const Track* t = s_.find_track(r.id);
      for (int k = 0; k + 1 < K_; ++k) {
        const auto& a = t->steps[k];
        const auto& b = t->steps[k + 1];
        if (explained[r.id][k]) continue;
        if (!a.moving && !b.moving && a.node == b.node) continue;
        const bool storage_move = !a.moving && !b.moving && (a.node == kStorageNode || b.node == kStorageNode);
        if (storage_move && !r.is_vehicle()) continue;  // accounted for by task starts and finishes
        add("motion", r.id + " changes position without a trip" + at(k + 1));
      }
    }
  }

  void check_storage_transitions() {
    const auto types = inst_.resource_types();
    for (const auto& ws : inst_.workstations)
      for (const auto& type : types)
        for (int k = 0; k + 1 < K_; ++k) {
          int left = 0;
          int entered = 0;
          for (const auto& r : inst_.resources) {
            if (r.is_vehicle() || r.resource_type != type) continue;
            const auto& tr = s_.find_track(r.id)->steps;
            const bool here_now = !tr[k].moving && tr[k].node == ws.id;
            const bool here_next = !tr[k + 1].moving && tr[k + 1].node == ws.id;
            const bool store_now = !tr[k].moving && tr[k].node == kStorageNode;
            const bool store_next = !tr[k + 1].moving && tr[k + 1].node == kStorageNode;
            if (here_now && store_next) {
              ++left;
              for (const auto& w : r.unavailable)
                if (w.contains(k)) add("resource", r.id + " is consumed while unavailable" + at(k));
            }
            const bool pending = r.transit && r.transit->from == kStorageNode && r.transit->to == ws.id &&
                                 r.transit->arrival_step == k + 1;
            if (store_now && here_next && !pending) ++entered;
            if (pending && !here_next) add("resource", r.id + " misses its pending credit" + at(k + 1));
          }
          int consumed = 0;
          int credited = 0;
          for (const auto& p : s_.tasks) {
            if (p.workstation != ws.id) continue;
            const TaskSpec* t = inst_.find_task(p.task);
            if (p.start == k)
              if (auto it = t->inputs.find(type); it != t->inputs.end()) consumed += it->second;
            if (p.finish == k) {
              if (auto it = t->outputs.find(type); it != t->outputs.end()) credited += it->second;
              if (auto it = t->inputs.find(type);
                  it != t->inputs.end() && inst_.type_category(type) == ResourceCategory::Instrument)
                credited += it->second;
            }
          }
          if (left != consumed)
            add("buffer", std::to_string(left) + " unit(s) of " + type + " leave workstation " + std::to_string(ws.id) +
                              " for " + std::to_string(consumed) + " consumed" + at(k));
          if (entered != credited)
            add("buffer", std::to_string(entered) + " unit(s) of " + type + " enter workstation " + std::to_string(ws.id) +
                              " for " + std::to_string(credited) + " credited" + at(k + 1));
        }
  }

  void check_buffers() {
    for (const auto& ws : inst_.workstations)
      for (const auto& type : inst_.resource_types()) {
        const Series* reported = nullptr;
        for (const auto& b : s_.buffers)
          if (b.workstation == ws.id && b.resource_type == type) reported = &b;
        const double lo = ws.buffer_min.count(type) ? ws.buffer_min.at(type) : 0.0;
        const double hi = ws.buffer_max.count(type) ? ws.buffer_max.at(type) : inst_.units_of_type(type);
        for (int k = 0; k < K_; ++k) {
          int level = 0;
          for (const auto& r : inst_.resources) {
            if (r.is_vehicle() || r.resource_type != type) continue;
            const auto& p = s_.find_track(r.id)->steps[k];
            level += !p.moving && p.node == ws.id;
          }
          if (level < lo - 1e-9 || level > hi + 1e-9)
            add("buffer", "buffer of " + type + " at workstation " + std::to_string(ws.id) + " is " +
                              std::to_string(level) + at(k));
          if (reported && (static_cast<int>(reported->values.size()) != K_ || std::abs(reported->values[k] - level) > 1e-6))
            add("buffer", "reported buffer of " + type + " at workstation " + std::to_string(ws.id) + " is wrong" + at(k));
        }
      }
  }

  const ProblemInstance& inst_;
  const Schedule& s_;
  int K_;
  std::vector<CheckViolation> out_;
};

}  // namespace

std::vector<CheckViolation> check_schedule(const ProblemInstance& instance, const Schedule& schedule) {
  return Checker(instance, schedule).run();
}

}  // namespace linea
