#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "linea/bnb.hpp"
#include "linea/milp.hpp"

namespace linea {

/// Where a vehicle or unit is at one step: at a node (workstation or the
/// storage node), or on an edge heading toward one of its endpoints.
struct Position {
  WorkstationId node = kStorageNode;  // meaningful when !moving
  bool moving = false;
  WorkstationId from = 0;  // edge endpoints as listed in the instance (from < to)
  WorkstationId to = 0;
  double progress = 0.0;    // fraction of the edge covered, measured from `from`
  WorkstationId heading = 0;  // endpoint being approached
  std::string carrier;      // vehicle carrying a unit on an edge

  bool operator==(const Position&) const = default;
};

/// Position `j` steps into an `n`-step trip from `from` to `to` (0 < j < n).
/// Progress is rounded to nine decimals so every producer agrees exactly.
Position edge_position(WorkstationId from, WorkstationId to, int j, int n);

struct Track {
  std::string resource;
  std::vector<Position> steps;  // one entry per step 0..horizon-1

  bool operator==(const Track&) const = default;
};

struct TaskPlan {
  std::string task;
  int start = -1;
  int finish = -1;  // start + duration: first step the task is finished
  WorkstationId workstation = 0;

  bool operator==(const TaskPlan&) const = default;
};

/// A vehicle leaving `from` at `step` and reaching `to` at `arrival`, with the
/// units it carries.
struct Departure {
  std::string vehicle;
  int step = 0;
  WorkstationId from = 0;
  WorkstationId to = 0;
  int arrival = 0;
  std::vector<std::string> cargo;

  bool operator==(const Departure&) const = default;
};

struct Series {
  WorkstationId workstation = 0;
  std::string resource_type;  // empty for occupancy
  std::vector<double> values;

  bool operator==(const Series&) const = default;
};

struct Schedule {
  std::string instance;
  std::string status;
  int horizon = 0;
  double objective = 0.0;
  int makespan = 0;
  std::vector<TaskPlan> tasks;  // instance task order
  std::vector<Departure> departures;
  std::vector<Track> vehicles;
  std::vector<Track> resources;  // non-vehicle resources
  std::vector<Series> buffers;
  std::vector<Series> occupancy;

  const TaskPlan* find_task(const std::string& id) const;
  const Track* find_track(const std::string& resource) const;
  bool operator==(const Schedule&) const = default;
};

/// Reads the semantic plan out of an integral MILP solution. Throws Error when
/// the solution is missing or a binary is fractional beyond `tolerance`.
Schedule decode_schedule(const MILPSolution& solution, const Encoding& encoding, const ProblemInstance& instance,
                         double tolerance = 1e-6);

nlohmann::json position_to_json(const Position& position);
Position position_from_json(const nlohmann::json& doc);

/// Recomputes buffer and occupancy series from the tracks and task plans.
void fill_series(Schedule& schedule, const ProblemInstance& instance);

/// Canonical document: sorted keys, two-space indentation, trailing newline.
std::string write_schedule_json(const Schedule& schedule);
nlohmann::json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const nlohmann::json& doc);
Schedule read_schedule_json(const std::string& text);

struct CheckViolation {
  std::string rule;  // window, state, uniqueness, precedence, occupancy, buffer, motion, resource, makespan
  std::string message;
};

/// Re-verifies a schedule directly against the instance, without the MILP
/// rows: task windows and durations, single assignment, precedence, down
/// windows, occupancy and buffer bounds, resource conservation through task
/// starts and finishes, and vehicle motion along edges.
std::vector<CheckViolation> check_schedule(const ProblemInstance& instance, const Schedule& schedule);

}  // namespace linea
