#pragma once

#include <atomic>
#include <functional>
#include <vector>

#include "linea/lp.hpp"
#include "linea/milp.hpp"

namespace linea {

enum class NodeOrder { BestBound, DepthFirst };
enum class Branching { MostFractional };

struct Progress {
  bool has_incumbent = false;
  double incumbent = 0.0;
  double bound = 0.0;
  long nodes = 0;
};

struct SolveParams {
  double gap = 1e-6;  // relative
  long node_limit = 1000000;
  double time_limit = 300.0;  // seconds
  Branching branching = Branching::MostFractional;
  NodeOrder order = NodeOrder::BestBound;
  double integrality_tolerance = 1e-6;
  double feasibility_tolerance = 1e-6;  // for re-verifying incumbents on the original rows
  LPOptions lp;

  long progress_every = 100;  // nodes between progress callbacks
  std::function<void(const Progress&)> on_progress;
  const std::atomic<bool>* cancel = nullptr;
};

/// Feasible: stopped by a limit or cancellation while holding an incumbent.
/// Limit: stopped the same way without one.
enum class MILPStatus { Optimal, Feasible, Infeasible, Limit };
const char* to_string(MILPStatus status);

struct MILPSolution {
  MILPStatus status = MILPStatus::Limit;
  std::vector<double> x;  // empty when no incumbent
  double objective = 0.0;
  double bound = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  bool has_solution() const { return !x.empty(); }
};

MILPSolution solve_milp(const MILPModel& model, const SolveParams& params = {});

/// Exhaustive enumeration of binary assignments with an LP over the
/// continuous columns at every complete assignment. Row activity bounds
/// skip partial assignments that cannot be completed.
MILPSolution brute_force(const MILPModel& model, int max_binaries = 20);

}  // namespace linea
