#include "linea/bnb.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace linea {

const char* to_string(MILPStatus status) {
  switch (status) {
    case MILPStatus::Optimal: return "Optimal";
    case MILPStatus::Feasible: return "Feasible";
    case MILPStatus::Infeasible: return "Infeasible";
    case MILPStatus::Limit: return "Limit";
  }
  return "Unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct BoundChange {
  int column;
  double lower;
  double upper;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInfinity;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;
};

struct BestFirst {
  bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

class NodePool {
 public:
  explicit NodePool(NodeOrder order) : order_(order) {}

  void push(std::shared_ptr<Node> n) {
    if (order_ == NodeOrder::BestBound)
      heap_.push(std::move(n));
    else
      stack_.push_back(std::move(n));
  }
  std::shared_ptr<Node> pop() {
    std::shared_ptr<Node> n;
    if (order_ == NodeOrder::BestBound) {
      n = heap_.top();
      heap_.pop();
    } else {
      n = stack_.back();
      stack_.pop_back();
    }
    return n;
  }
  bool empty() const { return heap_.empty() && stack_.empty(); }
  double min_bound() const {
    if (order_ == NodeOrder::BestBound) return heap_.empty() ? kInfinity : heap_.top()->bound;
    double b = kInfinity;
    for (const auto& n : stack_) b = std::min(b, n->bound);
    return b;
  }

 private:
  NodeOrder order_;
  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, BestFirst> heap_;
  std::vector<std::shared_ptr<Node>> stack_;
};

class BranchAndBound {
 public:
  BranchAndBound(const MILPModel& model, const SolveParams& params)
      : model_(model), params_(params), lp_(relaxation(model)), solver_(lp_, params.lp) {
    for (int j = 0; j < model.num_columns(); ++j)
      if (model.column(j).kind == ColumnKind::Binary) binaries_.push_back(j);
  }

  MILPSolution run() {
    const auto t0 = Clock::now();
    NodePool pool(params_.order);
    auto root = std::make_shared<Node>();
    root->id = next_id_++;
    pool.push(root);
    bool stopped = false;
    double stop_bound = kInfinity;

    while (!pool.empty()) {
      const double open_bound = pool.min_bound();
      if (has_incumbent_ && open_bound >= incumbent_obj_ - gap_abs()) break;
      if (result_.nodes >= params_.node_limit || seconds_since(t0) >= params_.time_limit ||
          (params_.cancel && params_.cancel->load())) {
        stopped = true;
        stop_bound = open_bound;
        break;
      }
      auto node = pool.pop();
      if (has_incumbent_ && node->bound >= incumbent_obj_ - gap_abs()) continue;
      process(*node, pool);
      if (params_.on_progress && result_.nodes % std::max(1L, params_.progress_every) == 0) report(pool);
    }

    result_.seconds = seconds_since(t0);
    if (stopped || unresolved_) {
      result_.status = has_incumbent_ ? MILPStatus::Feasible : MILPStatus::Limit;
      result_.bound = std::min(stopped ? stop_bound : kInfinity, unresolved_bound_);
      if (has_incumbent_) result_.bound = std::min(result_.bound, incumbent_obj_);
    } else if (has_incumbent_) {
      result_.status = MILPStatus::Optimal;
      result_.bound = std::min(pool.min_bound(), incumbent_obj_);
    } else {
      result_.status = MILPStatus::Infeasible;
      result_.bound = kInfinity;
    }
    if (has_incumbent_) {
      result_.x = incumbent_;
      result_.objective = incumbent_obj_;
    }
    if (params_.on_progress) report(pool);
    return result_;
  }

 private:
  const MILPModel& model_;
  const SolveParams& params_;
  LPProblem lp_;
  SimplexSolver solver_;
  std::vector<int> binaries_;
  std::vector<int> applied_;
  long next_id_ = 0;

  bool has_incumbent_ = false;
  double incumbent_obj_ = kInfinity;
  std::vector<double> incumbent_;
  bool unresolved_ = false;
  double unresolved_bound_ = kInfinity;
  MILPSolution result_;

  double gap_abs() const { return params_.gap * std::max(1.0, std::abs(incumbent_obj_)); }

  void report(const NodePool& pool) {
    Progress p;
    p.has_incumbent = has_incumbent_;
    p.incumbent = incumbent_obj_;
    p.bound = std::min(pool.min_bound(), has_incumbent_ ? incumbent_obj_ : kInfinity);
    p.nodes = result_.nodes;
    params_.on_progress(p);
  }

  void apply(const std::vector<BoundChange>& changes) {
    for (int j : applied_) solver_.set_column_bounds(j, lp_.col_lower[j], lp_.col_upper[j]);
    applied_.clear();
    for (const auto& c : changes) {
      solver_.set_column_bounds(c.column, c.lower, c.upper);
      applied_.push_back(c.column);
    }
  }

  LPSolution solve(const Basis* warm) {
    solver_.set_objective_cutoff(has_incumbent_ ? incumbent_obj_ - gap_abs() : kInfinity);
    auto sol = solver_.solve(warm);
    result_.lp_iterations += sol.iterations;
    if (sol.status == LPStatus::Unbounded) throw Error("solve_milp: LP relaxation is unbounded");
    return sol;
  }

  // Rounds binaries, re-solves the continuous part, and accepts the point if it
  // satisfies the original model rows.
  void try_incumbent(const std::vector<double>& x, const std::vector<BoundChange>& base, const Basis* warm) {
    std::vector<double> cand = x;
    for (int j : binaries_) cand[j] = std::round(cand[j]);
    if (accept(cand)) return;
    std::vector<BoundChange> fixed = base;
    for (int j : binaries_) fixed.push_back({j, cand[j], cand[j]});
    apply(fixed);
    auto sol = solve(warm);
    apply(base);
    if (sol.status != LPStatus::Optimal) return;
    for (int j : binaries_) sol.x[j] = cand[j];
    accept(sol.x);
  }

  bool accept(const std::vector<double>& x) {
    if (model_.max_violation(x) > params_.feasibility_tolerance) return false;
    const double obj = model_.objective(x);
    if (!has_incumbent_ || obj < incumbent_obj_) {
      has_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_ = x;
    }
    return true;
  }

  int most_fractional(const std::vector<double>& x) const {
    int pick = -1;
    double best = params_.integrality_tolerance;
    for (int j : binaries_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > best) {
        best = f;
        pick = j;
      }
    }
    return pick;
  }

  void process(Node& node, NodePool& pool) {
    ++result_.nodes;
    apply(node.changes);
    auto sol = solve(node.basis.get());
    if (sol.status == LPStatus::Infeasible || sol.status == LPStatus::Cutoff) return;
    if (sol.status != LPStatus::Optimal) {
      unresolved_ = true;
      unresolved_bound_ = std::min(unresolved_bound_, node.bound);
      return;
    }
    const double bound = std::max(node.bound, sol.objective);
    if (has_incumbent_ && bound >= incumbent_obj_ - gap_abs()) return;

    const int j = most_fractional(sol.x);
    if (j < 0) {
      try_incumbent(sol.x, node.changes, &sol.basis);
      return;
    }
    if (node.id == 0) try_incumbent(sol.x, node.changes, &sol.basis);

    auto basis = std::make_shared<const Basis>(sol.basis);
    auto child = [&](double lo, double hi) {
      auto c = std::make_shared<Node>();
      c->id = next_id_++;
      c->depth = node.depth + 1;
      c->bound = bound;
      c->changes = node.changes;
      c->changes.push_back({j, lo, hi});
      c->basis = basis;
      return c;
    };
    auto down = child(0.0, 0.0);
    auto up = child(1.0, 1.0);
    // Depth-first pops the last push: dive toward the nearer rounding.
    if (sol.x[j] >= 0.5) {
      pool.push(down);
      pool.push(up);
    } else {
      pool.push(up);
      pool.push(down);
    }
  }
};

class Enumerator {
 public:
  explicit Enumerator(const MILPModel& model) : model_(model), lp_(relaxation(model)), solver_(lp_) {
    for (int j = 0; j < model.num_columns(); ++j)
      if (model.column(j).kind == ColumnKind::Binary) binaries_.push_back(j);
    col_rows_.resize(model.num_columns());
    for (int i = 0; i < model.num_rows(); ++i)
      for (const auto& e : model.row(i).entries) col_rows_[e.column].push_back(i);
    lo_ = lp_.col_lower;
    hi_ = lp_.col_upper;
  }

  std::size_t binary_count() const { return binaries_.size(); }

  MILPSolution run() {
    const auto t0 = Clock::now();
    descend(0);
    result_.seconds = seconds_since(t0);
    if (best_.empty()) {
      result_.status = MILPStatus::Infeasible;
      result_.bound = kInfinity;
    } else {
      result_.status = MILPStatus::Optimal;
      result_.x = best_;
      result_.objective = best_obj_;
      result_.bound = best_obj_;
    }
    return result_;
  }

 private:
  const MILPModel& model_;
  LPProblem lp_;
  SimplexSolver solver_;
  std::vector<int> binaries_;
  std::vector<std::vector<int>> col_rows_;
  std::vector<double> lo_, hi_;
  std::vector<double> best_;
  double best_obj_ = kInfinity;
  MILPSolution result_;

  static constexpr double kTol = 1e-9;

  bool rows_can_hold(int column) const {
    for (int i : col_rows_[column]) {
      const Row& r = model_.row(i);
      double min_act = 0.0;
      double max_act = 0.0;
      for (const auto& e : r.entries) {
        const double a = e.value * lo_[e.column];
        const double b = e.value * hi_[e.column];
        min_act += std::min(a, b);
        max_act += std::max(a, b);
      }
      if (r.sense != RowSense::GreaterEqual && min_act > r.rhs + kTol) return false;
      if (r.sense != RowSense::LessEqual && max_act < r.rhs - kTol) return false;
    }
    return true;
  }

  void descend(std::size_t depth) {
    if (depth == binaries_.size()) {
      leaf();
      return;
    }
    const int j = binaries_[depth];
    const double lo = lo_[j];
    const double hi = hi_[j];
    for (double v : {0.0, 1.0}) {
      if (v < lo || v > hi) continue;
      lo_[j] = hi_[j] = v;
      if (rows_can_hold(j)) descend(depth + 1);
    }
    lo_[j] = lo;
    hi_[j] = hi;
  }

  void leaf() {
    ++result_.nodes;
    for (int j : binaries_) solver_.set_column_bounds(j, lo_[j], hi_[j]);
    auto sol = solver_.solve();
    result_.lp_iterations += sol.iterations;
    if (sol.status == LPStatus::Unbounded) throw Error("brute_force: residual LP is unbounded");
    if (sol.status != LPStatus::Optimal) return;
    for (int j : binaries_) sol.x[j] = lo_[j];
    if (sol.objective < best_obj_ - kTol) {
      best_obj_ = sol.objective;
      best_ = sol.x;
    }
  }
};

}  // namespace

MILPSolution solve_milp(const MILPModel& model, const SolveParams& params) {
  if (params.gap < 0 || params.node_limit < 1 || params.time_limit <= 0)
    throw Error("solve_milp: gap must be >= 0 and limits positive");
  BranchAndBound bnb(model, params);
  return bnb.run();
}

MILPSolution brute_force(const MILPModel& model, int max_binaries) {
  Enumerator e(model);
  if (e.binary_count() > static_cast<std::size_t>(max_binaries))
    throw Error("brute_force: " + std::to_string(e.binary_count()) + " binary columns exceed the limit of " +
                std::to_string(max_binaries));
  return e.run();
}

}  // namespace linea
