#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "linea/milp.hpp"

namespace linea {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Continuous minimization problem with individually bounded columns.
struct LPProblem {
  int num_cols = 0;
  std::vector<std::vector<RowEntry>> rows;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<double> cost;

  int num_rows() const { return static_cast<int>(rows.size()); }
  void add_row(std::vector<RowEntry> entries, RowSense s, double b) {
    rows.push_back(std::move(entries));
    sense.push_back(s);
    rhs.push_back(b);
  }
};

/// The continuous relaxation of `model` (binary columns become [0,1]).
LPProblem relaxation(const MILPModel& model);

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, Cutoff };
const char* to_string(LPStatus status);

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper };

/// Status of every structural column followed by every row logical.
struct Basis {
  std::vector<VarState> state;
  bool empty() const { return state.empty(); }
};

enum class Pricing { Dantzig, Devex };

struct LPOptions {
  Pricing pricing = Pricing::Devex;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-7;
  int max_iterations = 500000;
  int bland_after = 50;  // degenerate pivots before switching to Bland's rule
  int refactor_every = 40;
  bool perturb = true;  // expand bounds slightly while iterating, then clean up
  bool dual = true;     // run the dual simplex first on warm starts
  // Warm-started dual iterations stop with Cutoff once the objective exceeds this.
  double objective_cutoff = kInfinity;
};

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;          // one per row
  std::vector<double> reduced_costs;  // one per column
  int iterations = 0;
  double infeasibility = 0.0;  // phase-1 optimum when Infeasible
  Basis basis;
};

LPSolution solve_lp(const LPProblem& lp, double tolerance = 1e-7);

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max() const { return std::max(primal, std::max(dual, complementarity)); }
};

KktResiduals check_kkt(const LPProblem& lp, const LPSolution& solution);

/// Objective of the dual built from the solution's duals and reduced costs.
double dual_objective(const LPProblem& lp, const LPSolution& solution);

/// Reusable bounded simplex. Column bounds may be changed between solves and
/// a previous basis passed back in as a warm start, which is then reoptimized
/// with the dual simplex before the primal method finishes.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LPProblem& lp, LPOptions options = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  void set_column_bounds(int column, double lower, double upper);
  double column_lower(int column) const;
  double column_upper(int column) const;
  const LPProblem& problem() const;
  void set_objective_cutoff(double cutoff);

  LPSolution solve(const Basis* warm_start = nullptr);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace linea
