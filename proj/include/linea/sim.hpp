#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "linea/bnb.hpp"
#include "linea/schedule.hpp"

namespace linea {

enum class AnomalyKind { TaskDelay, VehicleSlowdown, ResourceUnavailable, WorkstationDown };
const char* to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& text);

/// A disturbance injected at the current clock.
///   TaskDelay           target task runs `steps` longer than planned
///   VehicleSlowdown     target vehicle's velocity is multiplied by `factor`
///                       for trips that begin from now on
///   ResourceUnavailable target unit cannot be moved or consumed in `window`
///   WorkstationDown     no task may start at `workstation` in `window`
/// Windows are absolute steps; a window starting before the clock is clipped.
struct AnomalyEvent {
  AnomalyKind kind = AnomalyKind::TaskDelay;
  std::string target;
  WorkstationId workstation = 0;
  int steps = 0;
  double factor = 1.0;
  StepWindow window;

  bool operator==(const AnomalyEvent&) const = default;
};

AnomalyEvent anomaly_from_json(const nlohmann::json& doc);
nlohmann::json anomaly_to_json(const AnomalyEvent& event);

enum class TaskPhase { Pending, Running, Done };
const char* to_string(TaskPhase phase);

struct TaskState {
  std::string task;
  TaskPhase phase = TaskPhase::Pending;
  int start = -1;
  int finish = -1;  // first step the task is finished (expected while running)
  WorkstationId workstation = 0;
};

/// Something that happened during a transition. Kinds: start, finish,
/// consume, credit, depart, arrive, blocked, anomaly, deviation, replan.
struct SimEvent {
  int step = 0;
  std::string kind;
  std::string subject;
  std::string message;
};

/// A difference between the executed state and the active plan.
struct Deviation {
  std::string kind;  // task, position
  std::string subject;
  std::string message;
};

struct SimOptions {
  SolveParams solve;
  bool auto_replan = false;  // replan whenever a step or anomaly causes a deviation
  int max_window = 0;        // cap on the default replanning window; 0 = remaining horizon
};

struct ReplanResult {
  bool applied = false;
  int clock = 0;
  int window = 0;
  ProblemInstance residual;
  MILPSolution solution;
  Schedule schedule;  // in residual steps: step 0 is the clock at replanning
  std::string message;
};

/// Discrete-time executor of a plan. The state at clock k mirrors the model's
/// state at step k: task starts at k are already applied, while the inputs
/// they consume leave the buffer at k+1 and outputs of a task finishing at k
/// are credited at k+1. Vehicles follow the plan's departures and carry the
/// cargo listed there.
class Simulator {
 public:
  Simulator(ProblemInstance instance, Schedule plan, SimOptions options = {});

  int clock() const { return clock_; }
  int horizon() const { return instance_.horizon; }
  bool finished() const { return clock_ >= instance_.horizon - 1; }

  /// Advances one step and returns the events of that transition.
  std::vector<SimEvent> step();
  void run(int steps);
  void run_to_end();

  /// Applies a disturbance at the current clock.
  void inject(const AnomalyEvent& event);

  /// Differences between the current state and what the plan expects now,
  /// including task finishes already known to slip. Positions are compared
  /// only inside the last solved window.
  std::vector<Deviation> detect_deviation() const;

  /// Default replanning window: twice the longest remaining chain of task
  /// durations plus the graph diameter in travel steps, capped by the
  /// remaining horizon and `SimOptions::max_window`.
  int default_window() const;

  /// The instance left to solve at the current clock: running tasks pinned to
  /// their workstation with their remaining duration, positions taken from
  /// the current state and steps renumbered from the clock.
  ProblemInstance residual_instance(std::optional<int> window = {}) const;

  /// Solves the residual instance and, when a schedule is found, replaces the
  /// plan from the current clock on. The executed past is left untouched.
  /// `params` overrides the solver settings from SimOptions for this call.
  ReplanResult replan(std::optional<int> window = {}, const std::optional<SolveParams>& params = {});

  const ProblemInstance& instance() const { return instance_; }
  /// The active plan in absolute steps.
  const Schedule& plan() const { return plan_; }
  /// Executed history for steps 0..clock in the schedule document layout.
  Schedule trajectory() const;
  const std::vector<TaskState>& tasks() const { return tasks_; }
  const Position& position(const std::string& resource) const;
  const std::vector<SimEvent>& events() const { return events_; }

  nlohmann::json state_json() const;
  /// One JSON object per line: every event, then a state line per step.
  std::string trace_ndjson() const;

 private:
  struct Trip {
    std::string vehicle;
    WorkstationId from = 0;
    WorkstationId to = 0;
    int depart = 0;
    int steps = 1;
    std::vector<std::string> cargo;
  };
  struct PendingCredit {
    std::string resource;
    WorkstationId to = 0;
    int arrival = 0;
  };

  void apply_starts(int k, std::vector<SimEvent>& out);
  // Units that appear at a workstation at k+1: outputs and instruments of
  // tasks finishing at k. Prefers the units the plan moves, then instance order.
  std::vector<std::pair<std::string, WorkstationId>> credit_units(int k) const;
  void record_snapshot();
  void emit(std::vector<SimEvent>& out, int k, std::string kind, std::string subject, std::string message);
  int resource_index(const std::string& id) const;
  int vehicle_steps(const std::string& vehicle) const;
  bool unit_unavailable(const std::string& id, int from, int to) const;
  bool down_at(WorkstationId w, int k) const;
  std::vector<std::string> units_at(const std::string& type, WorkstationId w) const;
  const Position* planned_position(const std::string& resource, int k) const;
  double occupancy(WorkstationId w) const;

  ProblemInstance instance_;
  Schedule plan_;
  SimOptions options_;
  int clock_ = 0;
  std::map<std::string, Position> pos_;
  std::vector<TaskState> tasks_;
  std::map<std::string, std::vector<std::string>> held_;  // task -> instruments it holds
  std::map<std::string, std::vector<std::string>> consumed_;  // task -> inputs drawn at its start
  std::map<std::string, int> extra_;                      // task -> delay steps
  std::map<std::string, double> speed_;                   // vehicle -> velocity factor
  std::map<std::string, std::vector<StepWindow>> unavailable_;
  std::map<WorkstationId, std::vector<StepWindow>> down_;
  std::vector<Trip> trips_;
  std::vector<PendingCredit> credits_;
  std::vector<Departure> executed_;
  std::vector<SimEvent> events_;
  std::vector<std::map<std::string, Position>> history_;
  std::vector<AnomalyEvent> anomalies_;
  std::set<std::string> blocked_;  // tasks whose blocked start was already reported
  // Positions in the plan are solved up to this step; a replanning window
  // shorter than the horizon leaves later steps holding the last position.
  int planned_until_ = 0;
};

}  // namespace linea
