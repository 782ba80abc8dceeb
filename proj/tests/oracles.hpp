#pragma once

// Test-only reference implementations. None of these share code paths with
// the library solvers they are used to check.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "linea/lp.hpp"
#include "linea/model.hpp"

namespace linea::testing {

struct TableauResult {
  LPStatus status = LPStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Dense two-phase tableau simplex with Bland's rule.
TableauResult dense_tableau(const LPProblem& lp);

/// Random bounded LP built around a known feasible point.
LPProblem random_lp(std::mt19937& rng, int rows, int cols);

/// The two-task, three-workstation, one-vehicle line used for replication.
ProblemInstance two_task_line();

/// Two workstations joined by a two-step edge: task_a turns `raw` into
/// `part` at workstation 1, task_b needs `part` and the `fixture` instrument
/// at workstation 2. One cart carries one unit.
ProblemInstance shuttle_instance();

/// Tiny random instance without vehicles (at most 2 tasks, 2 workstations,
/// horizon <= 8) whose encoding has at most `max_binaries` binary columns.
ProblemInstance random_tiny_instance(std::mt19937& rng, int max_binaries = 20);

struct SearchResult {
  bool feasible = false;
  double objective = 0.0;
  int makespan = 0;
  std::map<std::string, int> start;               // task -> start step
  std::map<std::string, int> workstation;         // task -> workstation
  long states = 0;                                // states expanded
};

/// Exhaustive forward search over complete system states (vehicle position,
/// unit locations, task start times), step by step. It restates the timing
/// rules directly: inputs leave at start + 1, outputs and instruments are
/// credited at finish + 1 while that step is inside the horizon, cargo rides
/// only with a departure. Objective: weighted makespan plus the start-time
/// tie-break. Limited to one unit per resource type, at most one vehicle
/// and a makespan-only weighting. Trips under way at step 0 are followed to
/// their arrival.
SearchResult exhaustive_schedule_search(const ProblemInstance& instance);

}  // namespace linea::testing
