// Bounded-variable revised simplex.
//
// Every row i gets a logical r_i = a_i x with bounds taken from its sense, so
// the working system is [A | -I] (x, r) = 0 with all variables boxed. The
// basis is factorized with a sparse LU and updated in product form between
// refactorizations. Phase 1 minimizes the sum of bound violations of basic
// variables starting from whatever basis is at hand. Warm starts first run a
// dual simplex, since a bound change usually keeps the old basis dual
// feasible; the primal method then confirms or finishes the solve.

#include <cmath>
#include <random>

#include "basis_lu.hpp"
#include "linea/lp.hpp"

namespace linea {

const char* to_string(LPStatus status) {
  switch (status) {
    case LPStatus::Optimal: return "Optimal";
    case LPStatus::Infeasible: return "Infeasible";
    case LPStatus::Unbounded: return "Unbounded";
    case LPStatus::IterationLimit: return "IterationLimit";
    case LPStatus::Cutoff: return "Cutoff";
  }
  return "Unknown";
}

LPProblem relaxation(const MILPModel& model) {
  LPProblem lp;
  lp.num_cols = model.num_columns();
  for (const auto& c : model.columns()) {
    lp.col_lower.push_back(c.lower);
    lp.col_upper.push_back(c.upper);
    lp.cost.push_back(c.cost);
  }
  for (const auto& r : model.rows()) lp.add_row(r.entries, r.sense, r.rhs);
  return lp;
}

namespace {

constexpr double kPivotTolerance = 1e-9;

double row_lower(RowSense s, double rhs) { return s == RowSense::LessEqual ? -kInfinity : rhs; }
double row_upper(RowSense s, double rhs) { return s == RowSense::GreaterEqual ? kInfinity : rhs; }

}  // namespace

class SimplexSolver::Impl {
 public:
  Impl(const LPProblem& lp, LPOptions options) : lp_(lp), opt_(options) {
    m_ = lp_.num_rows();
    n_ = lp_.num_cols;
    build_columns();
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    cost_.assign(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.col_lower[j];
      hi_[j] = lp_.col_upper[j];
      cost_[j] = lp_.cost[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = row_lower(lp_.sense[i], lp_.rhs[i]);
      hi_[n_ + i] = row_upper(lp_.sense[i], lp_.rhs[i]);
    }
  }

  LPProblem lp_;
  LPOptions opt_;
  int m_ = 0;
  int n_ = 0;
  std::vector<int> col_start_;
  std::vector<int> row_idx_;
  std::vector<double> val_;
  std::vector<double> lo_, hi_, cost_;

  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<double> x_;

  detail::BasisLU lu_;
  struct Eta {
    int r = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };
  std::vector<Eta> etas_;

  void build_columns() {
    std::vector<int> counts(n_ + 1, 0);
    for (const auto& row : lp_.rows)
      for (const auto& e : row) counts[e.column + 1]++;
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j + 1];
    row_idx_.resize(col_start_[n_]);
    val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (const auto& e : lp_.rows[i]) {
        row_idx_[fill[e.column]] = i;
        val_[fill[e.column]++] = e.value;
      }
  }

  template <typename F>
  void for_column(int j, F&& f) const {
    if (j >= n_) {
      f(j - n_, -1.0);
      return;
    }
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) f(row_idx_[p], val_[p]);
  }

  double dot_column(int j, const std::vector<double>& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) s += val_[p] * y[row_idx_[p]];
    return s;
  }

  double nonbasic_value(int j) const {
    if (state_[j] == VarState::AtUpper && std::isfinite(hi_[j])) return hi_[j];
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(hi_[j])) return hi_[j];
    return 0.0;
  }

  void normalize_nonbasic(int j) {
    if (state_[j] == VarState::Basic) return;
    if (state_[j] == VarState::AtLower && !std::isfinite(lo_[j]) && std::isfinite(hi_[j])) state_[j] = VarState::AtUpper;
    if (state_[j] == VarState::AtUpper && !std::isfinite(hi_[j]) && std::isfinite(lo_[j])) state_[j] = VarState::AtLower;
    x_[j] = nonbasic_value(j);
  }

  void slack_basis() {
    const int N = n_ + m_;
    state_.assign(N, VarState::AtLower);
    head_.resize(m_);
    pos_.assign(N, -1);
    x_.assign(N, 0.0);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      state_[n_ + i] = VarState::Basic;
    }
    for (int j = 0; j < n_; ++j) normalize_nonbasic(j);
  }

  // Triangular crash over equality rows: repeatedly pivot a column that has
  // exactly one entry among the equality rows not yet covered. The basis
  // stays triangular, so it is nonsingular by construction.
  void crash_basis() {
    slack_basis();
    std::vector<int> active_count(n_, 0);
    std::vector<char> active(m_, 0);
    for (int i = 0; i < m_; ++i) active[i] = lp_.sense[i] == RowSense::Equal;
    for (int j = 0; j < n_; ++j)
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) active_count[j] += active[row_idx_[p]];
    // Continuous free-ish columns first, binaries last, fixed columns never.
    auto rank = [&](int j) {
      if (lo_[j] == hi_[j]) return -1;
      return std::isfinite(hi_[j] - lo_[j]) ? (hi_[j] - lo_[j] > 1.0 ? 1 : 2) : 0;
    };
    for (int pass = 0; pass <= 2; ++pass) {
      bool progress = true;
      while (progress) {
        progress = false;
        for (int j = 0; j < n_; ++j) {
          if (state_[j] == VarState::Basic || active_count[j] != 1 || rank(j) != pass) continue;
          int r = -1;
          for (int p = col_start_[j]; p < col_start_[j + 1]; ++p)
            if (active[row_idx_[p]]) r = row_idx_[p];
          const int logical = n_ + r;
          state_[logical] = VarState::AtLower;
          pos_[logical] = -1;
          normalize_nonbasic(logical);
          head_[r] = j;
          pos_[j] = r;
          state_[j] = VarState::Basic;
          active[r] = 0;
          for_row_columns(r, [&](int c) { --active_count[c]; });
          progress = true;
        }
      }
    }
  }

  template <typename F>
  void for_row_columns(int r, F&& f) const {
    for (const auto& e : lp_.rows[r]) f(e.column);
  }

  bool load_basis(const Basis& basis) {
    const int N = n_ + m_;
    if (static_cast<int>(basis.state.size()) != N) return false;
    int basic = 0;
    for (auto s : basis.state) basic += s == VarState::Basic;
    if (basic != m_) return false;
    state_ = basis.state;
    head_.clear();
    pos_.assign(N, -1);
    x_.assign(N, 0.0);
    for (int j = 0; j < N; ++j)
      if (state_[j] == VarState::Basic) {
        pos_[j] = static_cast<int>(head_.size());
        head_.push_back(j);
      } else {
        normalize_nonbasic(j);
      }
    return true;
  }

  // Factorizes the current basis. Columns that make it singular are swapped
  // for the logicals of the rows left without a pivot.
  bool factorize() {
    etas_.clear();
    if (m_ == 0) return true;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::vector<detail::SparseColumn> cols(m_);
      for (int i = 0; i < m_; ++i)
        for_column(head_[i], [&](int r, double v) {
          cols[i].rows.push_back(r);
          cols[i].values.push_back(v);
        });
      if (lu_.factorize(m_, cols)) return true;
      const auto& rows = lu_.unpivoted_rows();
      const auto& positions = lu_.unpivoted_columns();
      for (std::size_t k = 0; k < rows.size() && k < positions.size(); ++k) {
        const int p = positions[k];
        const int out = head_[p];
        const int in = n_ + rows[k];
        state_[out] = VarState::AtLower;
        pos_[out] = -1;
        normalize_nonbasic(out);
        head_[p] = in;
        pos_[in] = p;
        state_[in] = VarState::Basic;
      }
    }
    return false;
  }

  void ftran(std::vector<double>& v) const {
    if (m_ == 0) return;
    lu_.ftran(v);
    for (const auto& eta : etas_) {
      const double vr = v[eta.r] / eta.pivot;
      if (vr != 0.0)
        for (std::size_t k = 0; k < eta.idx.size(); ++k) v[eta.idx[k]] -= eta.val[k] * vr;
      v[eta.r] = vr;
    }
  }

  void btran(std::vector<double>& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->r];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
      v[it->r] = s / it->pivot;
    }
    lu_.btran(v);
  }

  void compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      const double xj = x_[j];
      if (xj != 0.0) for_column(j, [&](int r, double v) { rhs[r] -= v * xj; });
    }
    ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = rhs[i];
  }

  double violation(int j) const {
    if (x_[j] < lo_[j]) return lo_[j] - x_[j];
    if (x_[j] > hi_[j]) return x_[j] - hi_[j];
    return 0.0;
  }

  bool refresh() {
    if (!factorize()) {
      slack_basis();
      if (!factorize()) return false;
    }
    compute_basic_values();
    return true;
  }

  std::vector<double> weight_;  // Devex reference weights
  std::vector<double> d_;       // reduced costs of every variable
  std::vector<double> arow_;    // pivot row of B^-1 [A | -I]
  std::vector<int> arow_nz_;
  std::vector<char> arow_mark_;

  static constexpr double kDrop = 1e-12;

  void touch(int j, double v) {
    if (!arow_mark_[j]) {
      arow_mark_[j] = 1;
      arow_nz_.push_back(j);
    }
    arow_[j] += v;
  }

  // Row `r` of B^-1 [A | -I], gathered row-wise from the nonzeros of rho.
  void pivot_row(int r, std::vector<double>& rho) {
    for (int j : arow_nz_) {
      arow_[j] = 0.0;
      arow_mark_[j] = 0;
    }
    arow_nz_.clear();
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    btran(rho);
    for (int i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (std::abs(ri) <= kDrop) continue;
      for (const auto& e : lp_.rows[i]) touch(e.column, ri * e.value);
      touch(n_ + i, -ri);
    }
  }

  void update_devex(int enter, int leave, double pivot) {
    const double wq = weight_[enter];
    double largest = 0.0;
    for (int j : arow_nz_) {
      if (state_[j] == VarState::Basic || j == enter) continue;
      const double ratio = arow_[j] / pivot;
      weight_[j] = std::max(weight_[j], ratio * ratio * wq);
      largest = std::max(largest, weight_[j]);
    }
    weight_[head_[leave]] = std::max(wq / (pivot * pivot), 1.0);
    if (largest > 1e7) std::fill(weight_.begin(), weight_.end(), 1.0);
  }

  void compute_reduced_costs(std::vector<double>& y, bool phase1) {
    btran(y);
    for (int j = 0; j < n_ + m_; ++j)
      d_[j] = state_[j] == VarState::Basic ? 0.0 : (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
  }

  enum class DualOutcome { PrimalFeasible, Infeasible, Cutoff, Fallback, IterationLimit };

  double objective_value(const std::vector<double>& cost) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += cost[j] * x_[j];
    return s;
  }

  // Shifts every cost by a small deterministic amount in the direction that
  // keeps the current nonbasic bound dual feasible, which breaks the ties
  // among zero-ratio breakpoints.
  void perturb_costs() {
    std::mt19937 gen(54321);
    std::uniform_real_distribution<double> unit(0.5, 1.0);
    for (int j = 0; j < n_ + m_; ++j) {
      const double delta = 1e-6 * unit(gen) * (1.0 + std::abs(cost_[j]));
      if (lo_[j] == hi_[j]) continue;
      if (state_[j] == VarState::AtUpper)
        cost_[j] -= delta;
      else if (state_[j] == VarState::AtLower)
        cost_[j] += delta;
    }
  }

  // Flips nonbasic columns whose reduced cost has the wrong sign for their
  // bound. Returns false when a column with an infinite opposite bound blocks
  // dual feasibility.
  bool make_dual_feasible() {
    bool flipped = false;
    const double otol = opt_.optimality_tolerance;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
      const bool free = !std::isfinite(lo_[j]) && !std::isfinite(hi_[j]);
      if (free) {
        if (std::abs(d_[j]) > otol) return false;
        continue;
      }
      if (state_[j] == VarState::AtLower && d_[j] < -otol) {
        if (!std::isfinite(hi_[j])) return false;
        state_[j] = VarState::AtUpper;
        x_[j] = hi_[j];
        flipped = true;
      } else if (state_[j] == VarState::AtUpper && d_[j] > otol) {
        if (!std::isfinite(lo_[j])) return false;
        state_[j] = VarState::AtLower;
        x_[j] = lo_[j];
        flipped = true;
      }
    }
    if (flipped) compute_basic_values();
    return true;
  }

  void phase2_reduced_costs(std::vector<double>& y) {
    for (int i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
    compute_reduced_costs(y, false);
  }

  // Bounded dual simplex with a bound-flipping ratio test and dual Devex row
  // selection. Used for warm starts, where a bound change typically leaves
  // the previous optimal basis dual feasible but primal infeasible.
  DualOutcome dual_phase(int& iter) {
    const std::vector<double> true_cost = cost_;
    if (opt_.perturb) perturb_costs();
    const DualOutcome outcome = dual_iterations(iter, true_cost);
    cost_ = true_cost;
    return outcome;
  }

  DualOutcome dual_iterations(int& iter, const std::vector<double>& true_cost) {
    const double ftol = opt_.feasibility_tolerance;
    const int N = n_ + m_;
    std::vector<double> y(m_), alpha(m_), rho(m_), shift(m_);
    std::vector<double> rweight(m_, 1.0);
    d_.assign(N, 0.0);
    arow_.assign(N, 0.0);
    arow_mark_.assign(N, 0);
    arow_nz_.clear();
    phase2_reduced_costs(y);
    if (!make_dual_feasible()) return DualOutcome::Fallback;

    struct Breakpoint {
      double ratio;
      int j;
      double a;
    };
    std::vector<Breakpoint> cand;
    std::vector<int> flips;

    while (true) {
      if (iter >= opt_.max_iterations) return DualOutcome::IterationLimit;
      if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
        if (!factorize()) return DualOutcome::Fallback;
        compute_basic_values();
        phase2_reduced_costs(y);
        if (!make_dual_feasible()) return DualOutcome::Fallback;
      }
      if (std::isfinite(opt_.objective_cutoff) && objective_value(true_cost) > opt_.objective_cutoff)
        return DualOutcome::Cutoff;

      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double v = violation(head_[i]);
        if (v <= ftol) continue;
        const double score = v * v / rweight[i];
        if (score > best) {
          best = score;
          r = i;
        }
      }
      if (r < 0) return DualOutcome::PrimalFeasible;

      const int p = head_[r];
      const bool below = x_[p] < lo_[p];
      const double target = below ? lo_[p] : hi_[p];
      const double sign = below ? -1.0 : 1.0;
      pivot_row(r, rho);

      cand.clear();
      for (int j : arow_nz_) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double a = sign * arow_[j];
        const bool free = !std::isfinite(lo_[j]) && !std::isfinite(hi_[j]);
        const bool ok = free ? std::abs(a) > kPivotTolerance
                             : (state_[j] == VarState::AtLower ? a > kPivotTolerance : a < -kPivotTolerance);
        if (ok) cand.push_back({std::max(0.0, d_[j] / a), j, a});
      }
      if (cand.empty()) return DualOutcome::Infeasible;
      std::sort(cand.begin(), cand.end(), [](const Breakpoint& u, const Breakpoint& v) {
        return u.ratio < v.ratio || (u.ratio == v.ratio && u.j < v.j);
      });

      // Pass breakpoints while the dual objective keeps improving; every
      // boxed column passed over is flipped to its opposite bound.
      double slope = std::abs(x_[p] - target);
      std::size_t k = 0;
      for (; k < cand.size(); ++k) {
        const int j = cand[k].j;
        const double range = hi_[j] - lo_[j];
        if (!std::isfinite(range)) break;
        const double next = slope - std::abs(cand[k].a) * range;
        if (next <= ftol) break;
        slope = next;
      }
      if (k == cand.size()) return DualOutcome::Infeasible;
      std::size_t pick = k;
      for (std::size_t q = k + 1; q < cand.size() && cand[q].ratio <= cand[k].ratio + 1e-9; ++q)
        if (std::abs(cand[q].a) > std::abs(cand[pick].a)) pick = q;
      std::swap(cand[k], cand[pick]);
      const int enter = cand[k].j;

      flips.clear();
      for (std::size_t q = 0; q < k; ++q) flips.push_back(cand[q].j);
      if (!flips.empty()) {
        std::fill(shift.begin(), shift.end(), 0.0);
        for (int j : flips) {
          const double to = state_[j] == VarState::AtLower ? hi_[j] : lo_[j];
          const double dx = to - x_[j];
          state_[j] = state_[j] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
          x_[j] = to;
          for_column(j, [&](int row, double v) { shift[row] += v * dx; });
        }
        ftran(shift);
        for (int i = 0; i < m_; ++i)
          if (shift[i] != 0.0) x_[head_[i]] -= shift[i];
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(enter, [&](int row, double v) { alpha[row] = v; });
      ftran(alpha);
      const double pivot = alpha[r];
      if (std::abs(pivot - arow_[enter]) > 1e-7 * (1.0 + std::abs(pivot)) || std::abs(pivot) < kPivotTolerance) {
        // The updated factorization has drifted; rebuild and retry.
        if (etas_.empty()) return DualOutcome::Fallback;
        if (!factorize()) return DualOutcome::Fallback;
        compute_basic_values();
        phase2_reduced_costs(y);
        if (!make_dual_feasible()) return DualOutcome::Fallback;
        continue;
      }

      const double theta_p = (x_[p] - target) / pivot;
      x_[enter] += theta_p;
      for (int i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[head_[i]] -= theta_p * alpha[i];

      const double theta_d = d_[enter] / arow_[enter];
      for (int j : arow_nz_)
        if (state_[j] != VarState::Basic) d_[j] -= theta_d * arow_[j];
      d_[enter] = 0.0;
      d_[p] = -theta_d;

      const double wr = rweight[r];
      for (int i = 0; i < m_; ++i)
        if (i != r && alpha[i] != 0.0) {
          const double ratio = alpha[i] / pivot;
          rweight[i] = std::max(rweight[i], ratio * ratio * wr);
        }
      rweight[r] = std::max(wr / (pivot * pivot), 1.0);

      x_[p] = target;
      state_[p] = below ? VarState::AtLower : VarState::AtUpper;
      pos_[p] = -1;
      head_[r] = enter;
      pos_[enter] = r;
      state_[enter] = VarState::Basic;
      Eta eta;
      eta.r = r;
      eta.pivot = pivot;
      for (int i = 0; i < m_; ++i)
        if (i != r && std::abs(alpha[i]) > kDrop) {
          eta.idx.push_back(i);
          eta.val.push_back(alpha[i]);
        }
      etas_.push_back(std::move(eta));
      ++iter;
    }
  }

  LPSolution solve(const Basis* warm) {
    LPSolution sol;
    const double ftol = opt_.feasibility_tolerance;
    const double otol = opt_.optimality_tolerance;
    const int N = n_ + m_;
    int iter = 0;
    if (warm && load_basis(*warm)) {
      if (opt_.dual && refresh()) {
        switch (dual_phase(iter)) {
          case DualOutcome::Infeasible:
            sol.status = LPStatus::Infeasible;
            return finish(sol, iter);
          case DualOutcome::Cutoff:
            sol.status = LPStatus::Cutoff;
            return finish(sol, iter);
          case DualOutcome::IterationLimit:
            sol.status = LPStatus::IterationLimit;
            return finish(sol, iter);
          case DualOutcome::PrimalFeasible:
          case DualOutcome::Fallback:
            break;
        }
      }
    } else {
      crash_basis();
    }

    // Expand the bounds of basic variables by small deterministic amounts to
    // break degeneracy; the true bounds are restored before the final pass.
    const std::vector<double> true_lo = lo_;
    const std::vector<double> true_hi = hi_;
    bool perturbed = false;
    if (opt_.perturb) {
      std::mt19937 gen(12345);
      std::uniform_real_distribution<double> unit(1.0, 2.0);
      for (int j = 0; j < N; ++j) {
        const double a = unit(gen);
        const double b = unit(gen);
        if (state_[j] != VarState::Basic || !(lo_[j] < hi_[j])) continue;
        if (std::isfinite(lo_[j])) lo_[j] -= 1e-6 * a * (1.0 + std::abs(lo_[j]));
        if (std::isfinite(hi_[j])) hi_[j] += 1e-6 * b * (1.0 + std::abs(hi_[j]));
      }
      perturbed = true;
    }

    if (!refresh()) throw Error("simplex: cannot factorize the slack basis");

    int degenerate = 0;
    bool verified = false;
    bool fresh = false;  // phase-2 reduced costs in d_ are current
    std::vector<double> y(m_), alpha(m_), rho(m_);
    weight_.assign(N, 1.0);
    d_.assign(N, 0.0);
    arow_.assign(N, 0.0);
    arow_mark_.assign(N, 0);
    arow_nz_.clear();

    while (true) {
      if (iter >= opt_.max_iterations) {
        sol.status = LPStatus::IterationLimit;
        break;
      }
      if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
        refresh();
        fresh = false;
      }

      double infeas = 0.0;
      bool phase1 = false;
      for (int i = 0; i < m_; ++i) {
        const double v = violation(head_[i]);
        infeas += v;
        if (v > ftol) phase1 = true;
      }

      if (phase1 || !fresh) {
        for (int i = 0; i < m_; ++i) {
          const int b = head_[i];
          if (phase1)
            y[i] = x_[b] < lo_[b] - ftol ? -1.0 : (x_[b] > hi_[b] + ftol ? 1.0 : 0.0);
          else
            y[i] = cost_[b];
        }
        compute_reduced_costs(y, phase1);
        fresh = !phase1;
      }

      // Pricing: Devex reference weights (or Dantzig), and Bland's rule
      // during a degenerate streak.
      const bool bland = degenerate >= opt_.bland_after;
      int enter = -1;
      double enter_d = 0.0;
      double best = 0.0;
      for (int j = 0; j < N; ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double d = d_[j];
        double score = 0.0;
        if (d < -otol && x_[j] < hi_[j]) score = -d;
        if (d > otol && x_[j] > lo_[j]) score = d;
        if (score == 0.0) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (opt_.pricing == Pricing::Devex) score = score * score / weight_[j];
        if (score > best) {
          best = score;
          enter = j;
          enter_d = d;
        }
      }

      if (enter < 0) {
        if (!verified) {
          // Recompute from a fresh factorization before declaring the result.
          refresh();
          fresh = false;
          verified = true;
          continue;
        }
        if (perturbed && !phase1) {
          lo_ = true_lo;
          hi_ = true_hi;
          for (int j = 0; j < N; ++j) normalize_nonbasic(j);
          perturbed = false;
          verified = false;
          degenerate = 0;
          refresh();
          fresh = false;
          continue;
        }
        if (phase1) {
          sol.status = LPStatus::Infeasible;
          sol.infeasibility = infeas;
        } else {
          sol.status = LPStatus::Optimal;
        }
        break;
      }
      verified = false;

      const double sigma = enter_d < 0 ? 1.0 : -1.0;
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(enter, [&](int r, double v) { alpha[r] = v; });
      ftran(alpha);
      for (auto& a : alpha)
        if (std::abs(a) <= kDrop) a = 0.0;

      // Ratio test with a Harris-style two-pass selection.
      auto limit = [&](int i, double relax, double& target) -> double {
        const double rate = -sigma * alpha[i];
        const int b = head_[i];
        const double xb = x_[b];
        if (rate < 0) {
          if (phase1 && xb > hi_[b] + ftol) {
            target = hi_[b];
            return (xb - hi_[b] + relax) / -rate;
          }
          if (!std::isfinite(lo_[b]) || xb < lo_[b] - ftol) return kInfinity;
          target = lo_[b];
          return std::max(0.0, xb - lo_[b] + relax) / -rate;
        }
        if (phase1 && xb < lo_[b] - ftol) {
          target = lo_[b];
          return (lo_[b] - xb + relax) / rate;
        }
        if (!std::isfinite(hi_[b]) || xb > hi_[b] + ftol) return kInfinity;
        target = hi_[b];
        return std::max(0.0, hi_[b] - xb + relax) / rate;
      };

      double theta_relaxed = kInfinity;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= kPivotTolerance) continue;
        double t;
        theta_relaxed = std::min(theta_relaxed, limit(i, ftol, t));
      }
      int leave = -1;
      double leave_target = 0.0;
      double theta = kInfinity;
      double best_pivot = 0.0;
      if (std::isfinite(theta_relaxed)) {
        for (int i = 0; i < m_; ++i) {
          if (std::abs(alpha[i]) <= kPivotTolerance) continue;
          double target = 0.0;
          const double lim = limit(i, 0.0, target);
          if (lim > theta_relaxed) continue;
          const bool better = bland ? (leave < 0 || head_[i] < head_[leave]) : std::abs(alpha[i]) > best_pivot;
          if (better) {
            best_pivot = std::abs(alpha[i]);
            leave = i;
            leave_target = target;
            theta = lim;
          }
        }
      }

      const double flip = hi_[enter] - lo_[enter];
      const bool bound_flip = std::isfinite(flip) && flip <= theta;
      if (bound_flip) theta = flip;
      if (!std::isfinite(theta)) {
        sol.status = LPStatus::Unbounded;
        break;
      }

      x_[enter] += sigma * theta;
      for (int i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[head_[i]] -= sigma * theta * alpha[i];

      if (bound_flip) {
        state_[enter] = sigma > 0 ? VarState::AtUpper : VarState::AtLower;
        x_[enter] = sigma > 0 ? hi_[enter] : lo_[enter];
      } else {
        const int b = head_[leave];
        const double pivot = alpha[leave];
        pivot_row(leave, rho);
        if (opt_.pricing == Pricing::Devex) update_devex(enter, leave, pivot);
        if (fresh) {
          const double step = d_[enter] / pivot;
          for (int j : arow_nz_)
            if (state_[j] != VarState::Basic) d_[j] -= step * arow_[j];
          d_[enter] = 0.0;
          d_[b] = -step;
        }
        x_[b] = leave_target;
        state_[b] = (leave_target == lo_[b]) ? VarState::AtLower : VarState::AtUpper;
        pos_[b] = -1;
        head_[leave] = enter;
        pos_[enter] = leave;
        state_[enter] = VarState::Basic;
        Eta eta;
        eta.r = leave;
        eta.pivot = pivot;
        for (int i = 0; i < m_; ++i)
          if (i != leave && alpha[i] != 0.0) {
            eta.idx.push_back(i);
            eta.val.push_back(alpha[i]);
          }
        etas_.push_back(std::move(eta));
      }

      if (theta <= 1e-11)
        ++degenerate;
      else
        degenerate = 0;
      ++iter;
    }

    lo_ = true_lo;
    hi_ = true_hi;
    return finish(sol, iter);
  }

  LPSolution finish(LPSolution& sol, int iter) {
    std::vector<double> y(m_);
    sol.iterations = iter;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.basis.state = state_;
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * x_[j];
    if (sol.status == LPStatus::Optimal) {
      for (int i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
      btran(y);
      sol.duals = y;
      sol.reduced_costs.resize(n_);
      for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = cost_[j] - dot_column(j, y);
    }
    return sol;
  }
};

SimplexSolver::SimplexSolver(const LPProblem& lp, LPOptions options)
    : impl_(std::make_unique<Impl>(lp, options)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

void SimplexSolver::set_column_bounds(int column, double lower, double upper) {
  impl_->lo_.at(column) = lower;
  impl_->hi_.at(column) = upper;
}
double SimplexSolver::column_lower(int column) const { return impl_->lo_.at(column); }
double SimplexSolver::column_upper(int column) const { return impl_->hi_.at(column); }
const LPProblem& SimplexSolver::problem() const { return impl_->lp_; }
void SimplexSolver::set_objective_cutoff(double cutoff) { impl_->opt_.objective_cutoff = cutoff; }

LPSolution SimplexSolver::solve(const Basis* warm_start) { return impl_->solve(warm_start); }

LPSolution solve_lp(const LPProblem& lp, double tolerance) {
  LPOptions opt;
  opt.feasibility_tolerance = tolerance;
  opt.optimality_tolerance = tolerance;
  SimplexSolver solver(lp, opt);
  return solver.solve();
}

KktResiduals check_kkt(const LPProblem& lp, const LPSolution& sol) {
  KktResiduals res;
  const int m = lp.num_rows();
  const int n = lp.num_cols;
  std::vector<double> activity(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (const auto& e : lp.rows[i]) activity[i] += e.value * sol.x[e.column];
  for (int j = 0; j < n; ++j) {
    res.primal = std::max(res.primal, lp.col_lower[j] - sol.x[j]);
    res.primal = std::max(res.primal, sol.x[j] - lp.col_upper[j]);
  }
  for (int i = 0; i < m; ++i) {
    res.primal = std::max(res.primal, row_lower(lp.sense[i], lp.rhs[i]) - activity[i]);
    res.primal = std::max(res.primal, activity[i] - row_upper(lp.sense[i], lp.rhs[i]));
  }
  if (sol.duals.size() != static_cast<std::size_t>(m)) {
    res.dual = kInfinity;
    res.complementarity = kInfinity;
    return res;
  }

  std::vector<double> d(lp.cost.begin(), lp.cost.end());
  for (int i = 0; i < m; ++i)
    for (const auto& e : lp.rows[i]) d[e.column] -= sol.duals[i] * e.value;

  auto sign_and_slack = [&](double mult, double value, double lo, double hi) {
    // mult > 0 must sit at a finite lower bound, mult < 0 at a finite upper one.
    if (mult > 0) {
      if (!std::isfinite(lo)) res.dual = std::max(res.dual, mult);
      else res.complementarity = std::max(res.complementarity, mult * std::max(0.0, value - lo));
    } else if (mult < 0) {
      if (!std::isfinite(hi)) res.dual = std::max(res.dual, -mult);
      else res.complementarity = std::max(res.complementarity, -mult * std::max(0.0, hi - value));
    }
  };
  for (int j = 0; j < n; ++j) sign_and_slack(d[j], sol.x[j], lp.col_lower[j], lp.col_upper[j]);
  for (int i = 0; i < m; ++i)
    sign_and_slack(sol.duals[i], activity[i], row_lower(lp.sense[i], lp.rhs[i]), row_upper(lp.sense[i], lp.rhs[i]));
  return res;
}

double dual_objective(const LPProblem& lp, const LPSolution& sol) {
  constexpr double kZero = 1e-12;
  const int m = lp.num_rows();
  std::vector<double> d(lp.cost.begin(), lp.cost.end());
  for (int i = 0; i < m; ++i)
    for (const auto& e : lp.rows[i]) d[e.column] -= sol.duals[i] * e.value;
  double obj = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y = sol.duals[i];
    if (y > kZero) obj += y * row_lower(lp.sense[i], lp.rhs[i]);
    if (y < -kZero) obj += y * row_upper(lp.sense[i], lp.rhs[i]);
  }
  for (int j = 0; j < lp.num_cols; ++j) {
    if (d[j] > kZero) obj += d[j] * lp.col_lower[j];
    if (d[j] < -kZero) obj += d[j] * lp.col_upper[j];
  }
  return obj;
}

}  // namespace linea
