#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linea {

using WorkstationId = int;

/// Reserved id of the fictitious storage node that holds resources which are
/// not yet created, already consumed, or held by an executing task.
inline constexpr WorkstationId kStorageNode = 0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open step interval [from, to).
struct StepWindow {
  int from = 0;
  int to = 0;

  bool contains(int k) const { return k >= from && k < to; }
  bool operator==(const StepWindow&) const = default;
};

enum class DependencyKind { FinishToStart, StartToStart, FinishToFinish, StartToFinish };
enum class ResourceCategory { Consumable, Instrument, Vehicle };

struct TaskSpec {
  std::string id;
  int duration = 1;
  int earliest_start = 0;
  int latest_finish = 0;
  std::map<std::string, int> inputs;   // resource type -> quantity
  std::map<std::string, int> outputs;  // resource type -> quantity
  std::vector<WorkstationId> eligible_workstations;
  double capacity_weight = 1.0;

  bool operator==(const TaskSpec&) const = default;
};

struct TaskDependency {
  std::string predecessor;
  std::string successor;
  DependencyKind kind = DependencyKind::FinishToStart;

  bool operator==(const TaskDependency&) const = default;
};

/// A unit travelling on an edge when the instance begins (used by residual
/// instances built during replanning). The unit reaches `to` at `arrival_step`.
/// With `from` equal to the storage node the unit is an output credited to
/// `to` by a task that finished just before the instance begins; it has no
/// location until it arrives.
struct Transit {
  WorkstationId from = 0;
  WorkstationId to = 0;
  int arrival_step = 1;
  std::string carrier;  // vehicle id, empty for the vehicle itself

  bool operator==(const Transit&) const = default;
};

struct ResourceSpec {
  std::string id;
  std::string resource_type;
  ResourceCategory category = ResourceCategory::Consumable;
  WorkstationId initial_location = kStorageNode;
  std::optional<double> velocity;       // vehicles only, path fraction per second
  std::optional<int> carry_capacity;    // vehicles only
  std::vector<StepWindow> unavailable;  // cannot be moved or consumed
  std::optional<Transit> transit;

  bool is_vehicle() const { return category == ResourceCategory::Vehicle; }
  bool operator==(const ResourceSpec&) const = default;
};

struct WorkstationSpec {
  WorkstationId id = 1;
  double occupancy_min = 0.0;
  double occupancy_max = 1.0;
  std::map<std::string, double> buffer_min;
  std::map<std::string, double> buffer_max;
  std::map<std::string, double> initial_buffer;  // empty: derived from resources
  bool is_storage = false;
  std::vector<StepWindow> down;  // no task may execute here

  bool operator==(const WorkstationSpec&) const = default;
};

struct Edge {
  WorkstationId from = 0;
  WorkstationId to = 0;

  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

struct InventoryReference {
  WorkstationId workstation = 0;
  std::string resource_type;
  double level = 0.0;

  bool operator==(const InventoryReference&) const = default;
};

/// Convex combination of makespan, inventory deviation and linear cost terms.
struct ObjectiveConfig {
  double makespan_weight = 1.0;
  double inventory_weight = 0.0;
  double cost_weight = 0.0;
  // Secondary term preferring earlier task starts. Its total contribution is
  // at most this value, so it only separates schedules the weighted
  // objective ranks within that margin.
  double tiebreak_weight = 0.01;
  std::vector<InventoryReference> inventory_reference;
  std::map<std::string, double> linear_costs;  // family name -> coefficient

  bool operator==(const ObjectiveConfig&) const = default;
};

struct ProblemInstance {
  std::string name;
  int horizon = 0;
  double sampling_time = 1.0;
  std::vector<TaskSpec> tasks;
  std::vector<TaskDependency> dependencies;
  std::vector<ResourceSpec> resources;
  std::vector<WorkstationSpec> workstations;
  std::vector<Edge> edges;
  ObjectiveConfig objective;

  const TaskSpec* find_task(const std::string& id) const;
  const ResourceSpec* find_resource(const std::string& id) const;
  const WorkstationSpec* find_workstation(WorkstationId id) const;
  int task_index(const std::string& id) const;
  int resource_index(const std::string& id) const;
  int workstation_index(WorkstationId id) const;

  /// Resource types in first-appearance order over resources, then task
  /// inputs and outputs.
  std::vector<std::string> resource_types() const;
  std::optional<ResourceCategory> type_category(const std::string& type) const;
  int units_of_type(const std::string& type) const;

  /// Buffer level per type at `workstation` implied by resource initial locations.
  std::map<std::string, double> located_buffer(WorkstationId workstation) const;

  bool operator==(const ProblemInstance&) const = default;
};

enum class ViolationKind {
  BadHorizon,
  BadSamplingTime,
  DuplicateId,
  NonPositiveDuration,
  WindowTooSmall,
  WindowOutsideHorizon,
  NegativeCapacityWeight,
  NoEligibleWorkstation,
  UnknownWorkstation,
  UnknownTask,
  SelfDependency,
  DependencyCycle,
  VehicleParameters,
  MixedTypeCategory,
  ReservedWorkstationId,
  OccupancyRange,
  BufferRange,
  BufferMismatch,
  EdgeOrderViolation,
  DuplicateEdge,
  UnknownEdgeEndpoint,
  GraphDisconnected,
  ObjectiveWeights,
  BadStepWindow,
  BadTransit,
};

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::string message;
};

std::string to_string(ViolationKind kind);
std::string to_string(DependencyKind kind);
std::string to_string(ResourceCategory category);
DependencyKind parse_dependency_kind(const std::string& text);
ResourceCategory parse_resource_category(const std::string& text);

std::vector<Violation> validate(const ProblemInstance& instance);

/// Steps needed to traverse one unit-length edge: ceil(1 / (T * v)).
int travel_steps(const ProblemInstance& instance, const ResourceSpec& vehicle);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace linea
