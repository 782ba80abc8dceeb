#include "linea/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace linea {

const TaskSpec* ProblemInstance::find_task(const std::string& id) const {
  for (const auto& t : tasks)
    if (t.id == id) return &t;
  return nullptr;
}

const ResourceSpec* ProblemInstance::find_resource(const std::string& id) const {
  for (const auto& r : resources)
    if (r.id == id) return &r;
  return nullptr;
}

const WorkstationSpec* ProblemInstance::find_workstation(WorkstationId id) const {
  for (const auto& w : workstations)
    if (w.id == id) return &w;
  return nullptr;
}

int ProblemInstance::task_index(const std::string& id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].id == id) return static_cast<int>(i);
  return -1;
}

int ProblemInstance::resource_index(const std::string& id) const {
  for (std::size_t i = 0; i < resources.size(); ++i)
    if (resources[i].id == id) return static_cast<int>(i);
  return -1;
}

int ProblemInstance::workstation_index(WorkstationId id) const {
  for (std::size_t i = 0; i < workstations.size(); ++i)
    if (workstations[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> ProblemInstance::resource_types() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& t) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  };
  for (const auto& r : resources)
    if (!r.is_vehicle()) add(r.resource_type);
  for (const auto& t : tasks) {
    for (const auto& [type, q] : t.inputs) add(type);
    for (const auto& [type, q] : t.outputs) add(type);
  }
  return out;
}

std::optional<ResourceCategory> ProblemInstance::type_category(const std::string& type) const {
  for (const auto& r : resources)
    if (r.resource_type == type) return r.category;
  return std::nullopt;
}

int ProblemInstance::units_of_type(const std::string& type) const {
  return static_cast<int>(std::count_if(resources.begin(), resources.end(), [&](const ResourceSpec& r) {
    return !r.is_vehicle() && r.resource_type == type;
  }));
}

std::map<std::string, double> ProblemInstance::located_buffer(WorkstationId workstation) const {
  std::map<std::string, double> out;
  for (const auto& r : resources)
    if (!r.is_vehicle() && !r.transit && r.initial_location == workstation) out[r.resource_type] += 1.0;
  return out;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::BadHorizon: return "BadHorizon";
    case ViolationKind::BadSamplingTime: return "BadSamplingTime";
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::NonPositiveDuration: return "NonPositiveDuration";
    case ViolationKind::WindowTooSmall: return "WindowTooSmall";
    case ViolationKind::WindowOutsideHorizon: return "WindowOutsideHorizon";
    case ViolationKind::NegativeCapacityWeight: return "NegativeCapacityWeight";
    case ViolationKind::NoEligibleWorkstation: return "NoEligibleWorkstation";
    case ViolationKind::UnknownWorkstation: return "UnknownWorkstation";
    case ViolationKind::UnknownTask: return "UnknownTask";
    case ViolationKind::SelfDependency: return "SelfDependency";
    case ViolationKind::DependencyCycle: return "DependencyCycle";
    case ViolationKind::VehicleParameters: return "VehicleParameters";
    case ViolationKind::MixedTypeCategory: return "MixedTypeCategory";
    case ViolationKind::ReservedWorkstationId: return "ReservedWorkstationId";
    case ViolationKind::OccupancyRange: return "OccupancyRange";
    case ViolationKind::BufferRange: return "BufferRange";
    case ViolationKind::BufferMismatch: return "BufferMismatch";
    case ViolationKind::EdgeOrderViolation: return "EdgeOrderViolation";
    case ViolationKind::DuplicateEdge: return "DuplicateEdge";
    case ViolationKind::UnknownEdgeEndpoint: return "UnknownEdgeEndpoint";
    case ViolationKind::GraphDisconnected: return "GraphDisconnected";
    case ViolationKind::ObjectiveWeights: return "ObjectiveWeights";
    case ViolationKind::BadStepWindow: return "BadStepWindow";
    case ViolationKind::BadTransit: return "BadTransit";
  }
  return "Unknown";
}

std::string to_string(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::FinishToStart: return "FinishToStart";
    case DependencyKind::StartToStart: return "StartToStart";
    case DependencyKind::FinishToFinish: return "FinishToFinish";
    case DependencyKind::StartToFinish: return "StartToFinish";
  }
  return "FinishToStart";
}

std::string to_string(ResourceCategory category) {
  switch (category) {
    case ResourceCategory::Consumable: return "Consumable";
    case ResourceCategory::Instrument: return "Instrument";
    case ResourceCategory::Vehicle: return "Vehicle";
  }
  return "Consumable";
}

DependencyKind parse_dependency_kind(const std::string& text) {
  if (text == "FinishToStart") return DependencyKind::FinishToStart;
  if (text == "StartToStart") return DependencyKind::StartToStart;
  if (text == "FinishToFinish") return DependencyKind::FinishToFinish;
  if (text == "StartToFinish") return DependencyKind::StartToFinish;
  throw Error("unknown dependency kind '" + text + "'");
}

ResourceCategory parse_resource_category(const std::string& text) {
  if (text == "Consumable") return ResourceCategory::Consumable;
  if (text == "Instrument") return ResourceCategory::Instrument;
  if (text == "Vehicle") return ResourceCategory::Vehicle;
  throw Error("unknown resource category '" + text + "'");
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error([&] {
        std::string msg = "instance is invalid:";
        for (const auto& v : violations) msg += "\n  " + to_string(v.kind) + " (" + v.subject + "): " + v.message;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

const std::set<std::string>& cost_families() {
  static const std::set<std::string> families = {
      "start",      "assign",     "exec",       "idle",       "finished", "occupancy", "buffer",  "location",
      "place",      "goto_fwd",   "goto_bwd",   "depart_fwd", "depart_bwd", "ride",    "consume",
      "produce",    "makespan",   "linearize",  "deviation"};
  return families;
}

class Collector {
 public:
  void add(ViolationKind kind, std::string subject, std::string message) {
    out_.push_back({kind, std::move(subject), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

void check_windows(const std::vector<StepWindow>& windows, int horizon, const std::string& subject, Collector& c) {
  for (const auto& w : windows)
    if (w.from < 0 || w.to <= w.from || w.to > horizon)
      c.add(ViolationKind::BadStepWindow, subject,
            "window [" + std::to_string(w.from) + "," + std::to_string(w.to) + ") outside [0," +
                std::to_string(horizon) + "]");
}

bool has_finish_to_start_cycle(const ProblemInstance& inst) {
  const std::size_t n = inst.tasks.size();
  std::vector<std::vector<int>> succ(n);
  for (const auto& d : inst.dependencies) {
    if (d.kind != DependencyKind::FinishToStart) continue;
    int a = inst.task_index(d.predecessor);
    int b = inst.task_index(d.successor);
    if (a >= 0 && b >= 0 && a != b) succ[a].push_back(b);
  }
  std::vector<int> color(n, 0);
  std::function<bool(int)> visit = [&](int v) {
    color[v] = 1;
    for (int s : succ[v]) {
      if (color[s] == 1) return true;
      if (color[s] == 0 && visit(s)) return true;
    }
    color[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (color[v] == 0 && visit(static_cast<int>(v))) return true;
  return false;
}

}  // namespace

std::vector<Violation> validate(const ProblemInstance& inst) {
  Collector c;
  if (inst.horizon < 0) c.add(ViolationKind::BadHorizon, "horizon", "horizon must be nonnegative");
  if (!(inst.sampling_time > 0.0)) c.add(ViolationKind::BadSamplingTime, "sampling_time", "must be positive");

  std::set<WorkstationId> ws_ids;
  for (const auto& w : inst.workstations) {
    const std::string subject = "workstation " + std::to_string(w.id);
    if (w.id == kStorageNode) c.add(ViolationKind::ReservedWorkstationId, subject, "id 0 is the storage node");
    if (!ws_ids.insert(w.id).second) c.add(ViolationKind::DuplicateId, subject, "duplicate workstation id");
    if (w.occupancy_min > w.occupancy_max)
      c.add(ViolationKind::OccupancyRange, subject, "occupancy_min exceeds occupancy_max");
    const auto located = inst.located_buffer(w.id);
    for (const auto& type : inst.resource_types()) {
      double lo = w.buffer_min.count(type) ? w.buffer_min.at(type) : 0.0;
      double hi = w.buffer_max.count(type) ? w.buffer_max.at(type) : inst.units_of_type(type);
      double init = located.count(type) ? located.at(type) : 0.0;
      if (!w.initial_buffer.empty()) {
        double declared = w.initial_buffer.count(type) ? w.initial_buffer.at(type) : 0.0;
        if (declared != init)
          c.add(ViolationKind::BufferMismatch, subject,
                "initial_buffer of " + type + " disagrees with resource locations");
      }
      if (!(lo <= init && init <= hi))
        c.add(ViolationKind::BufferRange, subject, "initial level of " + type + " outside [min,max]");
    }
    check_windows(w.down, inst.horizon, subject, c);
  }

  std::set<std::string> task_ids;
  for (const auto& t : inst.tasks) {
    const std::string subject = "task " + t.id;
    if (!task_ids.insert(t.id).second) c.add(ViolationKind::DuplicateId, subject, "duplicate task id");
    if (t.duration < 1) c.add(ViolationKind::NonPositiveDuration, subject, "duration must be >= 1");
    if (t.earliest_start + t.duration > t.latest_finish)
      c.add(ViolationKind::WindowTooSmall, subject, "earliest_start + duration exceeds latest_finish");
    if (t.earliest_start < 0 || t.latest_finish > inst.horizon)
      c.add(ViolationKind::WindowOutsideHorizon, subject, "window does not fit in [0, horizon]");
    if (t.capacity_weight < 0) c.add(ViolationKind::NegativeCapacityWeight, subject, "capacity_weight < 0");
    if (t.eligible_workstations.empty())
      c.add(ViolationKind::NoEligibleWorkstation, subject, "no eligible workstation");
    for (auto w : t.eligible_workstations)
      if (!ws_ids.count(w))
        c.add(ViolationKind::UnknownWorkstation, subject, "eligible workstation " + std::to_string(w) + " not in graph");
  }

  for (const auto& d : inst.dependencies) {
    const std::string subject = d.predecessor + "->" + d.successor;
    if (!task_ids.count(d.predecessor) || !task_ids.count(d.successor))
      c.add(ViolationKind::UnknownTask, subject, "dependency references an unknown task");
    if (d.predecessor == d.successor) c.add(ViolationKind::SelfDependency, subject, "task depends on itself");
  }
  if (has_finish_to_start_cycle(inst))
    c.add(ViolationKind::DependencyCycle, "dependencies", "FinishToStart relation has a cycle");

  std::set<std::string> res_ids;
  std::map<std::string, ResourceCategory> categories;
  for (const auto& r : inst.resources) {
    const std::string subject = "resource " + r.id;
    if (!res_ids.insert(r.id).second) c.add(ViolationKind::DuplicateId, subject, "duplicate resource id");
    if (r.is_vehicle()) {
      if (!r.velocity || !(*r.velocity > 0) || !r.carry_capacity || *r.carry_capacity < 1)
        c.add(ViolationKind::VehicleParameters, subject, "vehicles need velocity > 0 and carry_capacity >= 1");
      if (!r.transit && !ws_ids.count(r.initial_location))
        c.add(ViolationKind::UnknownWorkstation, subject, "vehicle must start at a workstation or on an edge");
    } else {
      if (r.velocity || r.carry_capacity)
        c.add(ViolationKind::VehicleParameters, subject, "only vehicles carry velocity/carry_capacity");
      if (r.initial_location != kStorageNode && !ws_ids.count(r.initial_location))
        c.add(ViolationKind::UnknownWorkstation, subject, "unknown initial location");
    }
    auto [it, inserted] = categories.emplace(r.resource_type, r.category);
    if (!inserted && it->second != r.category)
      c.add(ViolationKind::MixedTypeCategory, subject, "type " + r.resource_type + " mixes categories");
    check_windows(r.unavailable, inst.horizon, subject, c);
    if (r.transit) {
      const auto& tr = *r.transit;
      Edge e{std::min(tr.from, tr.to), std::max(tr.from, tr.to)};
      bool edge_ok = std::find(inst.edges.begin(), inst.edges.end(), e) != inst.edges.end();
      bool step_ok = tr.arrival_step >= 1 && tr.arrival_step < std::max(inst.horizon, 1);
      bool carrier_ok = true;
      if (tr.from == kStorageNode) {
        // A pending credit: the unit appears at `to` without travelling.
        edge_ok = !r.is_vehicle() && ws_ids.count(tr.to) > 0;
        carrier_ok = tr.carrier.empty();
      } else if (r.is_vehicle()) {
        carrier_ok = tr.carrier.empty();
      } else {
        const auto* v = inst.find_resource(tr.carrier);
        carrier_ok = v && v->is_vehicle() && v->transit && v->transit->from == tr.from && v->transit->to == tr.to &&
                     v->transit->arrival_step == tr.arrival_step;
      }
      if (!edge_ok || !step_ok || !carrier_ok)
        c.add(ViolationKind::BadTransit, subject, "transit must follow an edge and match its carrier");
    }
  }

  std::set<Edge> seen;
  for (const auto& e : inst.edges) {
    const std::string subject = "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ")";
    if (e.from >= e.to) c.add(ViolationKind::EdgeOrderViolation, subject, "edges must satisfy w1 < w2");
    if (!ws_ids.count(e.from) || !ws_ids.count(e.to))
      c.add(ViolationKind::UnknownEdgeEndpoint, subject, "endpoint is not a workstation");
    Edge canon{std::min(e.from, e.to), std::max(e.from, e.to)};
    if (!seen.insert(canon).second) c.add(ViolationKind::DuplicateEdge, subject, "duplicate edge");
  }
  if (ws_ids.size() > 1) {
    std::map<WorkstationId, WorkstationId> parent;
    for (auto w : ws_ids) parent[w] = w;
    std::function<WorkstationId(WorkstationId)> find = [&](WorkstationId x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& e : inst.edges)
      if (ws_ids.count(e.from) && ws_ids.count(e.to)) parent[find(e.from)] = find(e.to);
    std::set<WorkstationId> roots;
    for (auto w : ws_ids) roots.insert(find(w));
    if (roots.size() > 1) c.add(ViolationKind::GraphDisconnected, "graph", "factory graph is not connected");
  }

  const auto& o = inst.objective;
  double sum = o.makespan_weight + o.inventory_weight + o.cost_weight;
  if (o.makespan_weight < 0 || o.inventory_weight < 0 || o.cost_weight < 0 || std::abs(sum - 1.0) > 1e-9)
    c.add(ViolationKind::ObjectiveWeights, "objective", "weights must be nonnegative and sum to 1");
  if (!(o.tiebreak_weight >= 0 && o.tiebreak_weight < 1))
    c.add(ViolationKind::ObjectiveWeights, "objective", "tiebreak_weight must lie in [0, 1)");
  for (const auto& ref : o.inventory_reference)
    if (!ws_ids.count(ref.workstation))
      c.add(ViolationKind::UnknownWorkstation, "objective", "inventory reference at unknown workstation");
  for (const auto& [family, coef] : o.linear_costs)
    if (!cost_families().count(family))
      c.add(ViolationKind::ObjectiveWeights, "objective", "unknown cost family '" + family + "'");

  return c.take();
}

int travel_steps(const ProblemInstance& instance, const ResourceSpec& vehicle) {
  if (!vehicle.is_vehicle()) throw Error("travel_steps: resource '" + vehicle.id + "' is not a vehicle");
  if (!vehicle.velocity || !(*vehicle.velocity > 0) || !(instance.sampling_time > 0))
    throw Error("travel_steps: vehicle '" + vehicle.id + "' has no positive velocity");
  const double per_step = instance.sampling_time * *vehicle.velocity;
  int steps = static_cast<int>(std::ceil(1.0 / per_step - 1e-9));
  steps = std::max(steps, 1);
  // Smallest n with n * T * v >= 1, tolerant of rounding in the product.
  while (steps * per_step < 1.0 - 1e-12) ++steps;
  while (steps > 1 && (steps - 1) * per_step >= 1.0 - 1e-12) --steps;
  return steps;
}

}  // namespace linea
