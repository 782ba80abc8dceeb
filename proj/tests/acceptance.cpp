// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "linea/bnb.hpp"
#include "linea/exchange.hpp"
#include "linea/lp.hpp"
#include "linea/sim.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct LineRun {
  ProblemInstance inst;
  Encoding enc;
  MILPSolution sol;
  Schedule plan;
  double seconds = 0.0;
};

const LineRun& line_run() {
  static const LineRun run = [] {
    LineRun r;
    r.inst = testing::two_task_line();
    const auto t0 = Clock::now();
    r.enc = encode(r.inst);
    r.sol = solve_milp(r.enc.model);
    r.seconds = seconds_since(t0);
    if (r.sol.status == MILPStatus::Optimal) r.plan = decode_schedule(r.sol, r.enc, r.inst);
    return r;
  }();
  return run;
}

bool at_node(const Schedule& s, const std::string& unit, int step, WorkstationId w) {
  const Track* t = s.find_track(unit);
  return t && step < static_cast<int>(t->steps.size()) && !t->steps[step].moving && t->steps[step].node == w;
}

void criterion_line(Outcome& out) {
  const auto& run = line_run();
  out.require(run.sol.status == MILPStatus::Optimal, "line solved to optimality");
  if (!out.pass) return;
  const auto* t1 = run.plan.find_task("task1");
  const auto* t2 = run.plan.find_task("task2");
  out.require(t1 && t1->start == 0, "task1 starts at 0");
  out.require(t2 && t2->start == 14, "task2 starts at 14");
  out.require(at_node(run.plan, "r3", 4, 1), "r3 at w1 at step 4");
  out.require(at_node(run.plan, "r3", 9, 2), "r3 at w2 at step 9");
  out.require(at_node(run.plan, "r3", 14, 3), "r3 at w3 at step 14");
  const auto oracle = testing::exhaustive_schedule_search(run.inst);
  out.require(oracle.feasible && close(run.sol.objective, oracle.objective, 1e-9), "objective equals state-search optimum");
  out.require(oracle.makespan == run.plan.makespan, "makespan equals state-search optimum");
  out.require(run.seconds < 120.0, "solve under 120 s");
  out.detail << "makespan " << run.plan.makespan << ", objective " << run.sol.objective << ", oracle "
             << oracle.objective << ", " << run.seconds << " s";
}

void criterion_tiny(Outcome& out) {
  std::mt19937 rng(2024);
  const auto t0 = Clock::now();
  int feasible = 0;
  int agree = 0;
  for (int n = 0; n < 50; ++n) {
    const auto inst = testing::random_tiny_instance(rng);
    const auto enc = encode(inst);
    const auto bb = solve_milp(enc.model);
    const auto ex = brute_force(enc.model);
    const bool both = bb.status == MILPStatus::Optimal && ex.status == MILPStatus::Optimal;
    const bool neither = bb.status == MILPStatus::Infeasible && ex.status == MILPStatus::Infeasible;
    feasible += both;
    if (neither || (both && close(bb.objective, ex.objective, 1e-6))) ++agree;
  }
  const double secs = seconds_since(t0);
  out.require(agree == 50, "all 50 instances agree");
  out.require(secs < 60.0, "under 60 s");
  out.detail << agree << "/50 agree (" << feasible << " feasible), " << secs << " s";
}

void criterion_lp(Outcome& out) {
  std::mt19937 rng(20240611);
  int good = 0;
  double worst_kkt = 0.0;
  double worst_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::uniform_int_distribution<int> rows(3, 25);
    std::uniform_int_distribution<int> cols(3, 30);
    const auto lp = testing::random_lp(rng, rows(rng), cols(rng));
    const auto sol = solve_lp(lp);
    const auto ref = testing::dense_tableau(lp);
    if (sol.status != LPStatus::Optimal || ref.status != LPStatus::Optimal) continue;
    const double kkt = check_kkt(lp, sol).max();
    const double gap = std::abs(sol.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
    worst_kkt = std::max(worst_kkt, kkt);
    worst_gap = std::max(worst_gap, gap);
    good += kkt <= 1e-7 && gap <= 1e-7;
  }
  out.require(good == 100, "all 100 LPs within 1e-7");
  out.detail << good << "/100, worst KKT " << worst_kkt << ", worst gap " << worst_gap;
}

void criterion_linearization(Outcome& out) {
  const std::pair<double, double> bounds[] = {{-2.0, 3.0}, {0.5, 4.0}, {-5.0, -1.0}, {0.0, 10.0}};
  int points = 0;
  double worst = 0.0;
  for (auto [lo, hi] : bounds) {
    MILPModel m;
    const int b = m.add_column("b", ColumnKind::Binary, 0, 1);
    const int x = m.add_column("x", ColumnKind::Continuous, lo, hi);
    const auto lin = linearize_product(m, b, x, "z");
    for (int bv = 0; bv <= 1; ++bv)
      for (int i = 0; i <= 8; ++i) {
        const double xv = lo + (hi - lo) * i / 8.0;
        // The feasible z range at (b, x) must collapse to the single point b*x.
        double zlo = -1e300;
        double zhi = 1e300;
        for (int r : lin.rows) {
          const Row& row = m.row(r);
          double rest = 0.0;
          double zc = 0.0;
          for (const auto& e : row.entries) {
            if (e.column == lin.column)
              zc = e.value;
            else
              rest += e.value * (e.column == b ? bv : xv);
          }
          const double bound = (row.rhs - rest) / zc;
          const bool upper = (row.sense == RowSense::LessEqual) == (zc > 0);
          if (row.sense == RowSense::Equal) {
            zlo = std::max(zlo, bound);
            zhi = std::min(zhi, bound);
          } else if (upper) {
            zhi = std::min(zhi, bound);
          } else {
            zlo = std::max(zlo, bound);
          }
        }
        const double want = bv * xv;
        worst = std::max({worst, std::abs(zlo - want), std::abs(zhi - want)});
        ++points;
      }
  }
  out.require(worst <= 1e-12, "z pinned to b*x at every grid point");
  out.detail << points << " grid points, worst deviation " << worst;
}

void criterion_checker(Outcome& out) {
  const auto& run = line_run();
  int checked = 0;
  int clean = 0;
  if (run.sol.status == MILPStatus::Optimal) {
    ++checked;
    clean += check_schedule(run.inst, run.plan).empty();
  }
  std::mt19937 rng(2024);
  for (int n = 0; n < 50; ++n) {
    const auto inst = testing::random_tiny_instance(rng);
    const auto enc = encode(inst);
    const auto sol = solve_milp(enc.model);
    if (sol.status != MILPStatus::Optimal) continue;
    ++checked;
    clean += check_schedule(inst, decode_schedule(sol, enc, inst)).empty();
  }
  out.require(checked > 1 && clean == checked, "every solution passes");
  out.detail << clean << "/" << checked << " schedules pass";
}

void criterion_exchange(Outcome& out) {
  std::vector<std::pair<std::string, MILPModel>> models;
  models.emplace_back("line", line_run().enc.model);
  std::mt19937 rng(11);
  for (int n = 0; n < 20; ++n) models.emplace_back("tiny", encode(testing::random_tiny_instance(rng)).model);
  int good = 0;
  for (const auto& [name, m] : models) {
    const std::string mps = write_mps(m, name);
    const std::string lp = write_lp(m, name);
    const auto from_mps = read_mps(mps);
    const auto from_lp = read_lp(lp);
    const bool ok = structurally_equal(m, from_mps, true) && structurally_equal(m, from_lp, true) &&
                    write_mps(m, name) == mps && write_lp(m, name) == lp && write_mps(from_mps, name) == mps &&
                    write_lp(from_lp, name) == lp;
    good += ok;
  }
  out.require(good == static_cast<int>(models.size()), "all models round-trip with identical rewrites");
  out.detail << good << "/" << models.size() << " models";
}

void criterion_simulation(Outcome& out) {
  const auto& run = line_run();
  out.require(run.sol.status == MILPStatus::Optimal, "line plan available");
  if (!out.pass) return;
  Simulator sim(run.inst, run.plan);
  sim.run_to_end();
  const Schedule traj = sim.trajectory();
  int matching = 0;
  const int K = run.inst.horizon;
  for (int k = 0; k < K; ++k) {
    bool same = true;
    for (const auto* pair : {&traj.vehicles, &traj.resources})
      for (const auto& t : *pair) {
        const Track* p = run.plan.find_track(t.resource);
        same = same && p && k < static_cast<int>(t.steps.size()) && t.steps[k] == p->steps[k];
      }
    for (std::size_t i = 0; i < traj.buffers.size(); ++i)
      same = same && traj.buffers[i].values.at(k) == run.plan.buffers[i].values.at(k);
    for (std::size_t i = 0; i < traj.occupancy.size(); ++i)
      same = same && traj.occupancy[i].values.at(k) == run.plan.occupancy[i].values.at(k);
    matching += same;
  }
  auto by_task = [](std::vector<TaskPlan> v) {
    std::sort(v.begin(), v.end(), [](const TaskPlan& a, const TaskPlan& b) { return a.task < b.task; });
    return v;
  };
  out.require(matching == K, "every step matches");
  out.require(by_task(traj.tasks) == by_task(run.plan.tasks), "task times match");
  out.require(traj.departures == run.plan.departures, "departures match");
  out.detail << matching << "/" << K << " steps identical";
}

void criterion_replan(Outcome& out) {
  const auto& run = line_run();
  out.require(run.sol.status == MILPStatus::Optimal, "line plan available");
  if (!out.pass) return;
  Simulator sim(run.inst, run.plan);
  sim.run(2);
  sim.inject({AnomalyKind::TaskDelay, "task1", 0, 2, 1.0, {}});
  const Schedule before = sim.trajectory();
  const auto t0 = Clock::now();
  const auto r = sim.replan();
  const double secs = seconds_since(t0);
  out.require(r.applied, "replan found a schedule");
  if (!r.applied) return;
  const auto violations = check_schedule(r.residual, r.schedule);
  out.require(violations.empty(), "residual schedule passes the checker");

  bool past = true;
  for (const auto* list : {&before.vehicles, &before.resources})
    for (const auto& t : *list)
      for (int s = 0; s <= 2; ++s) past = past && sim.plan().find_track(t.resource)->steps[s] == t.steps[s];
  for (const auto& t : before.tasks) {
    const auto* p = sim.plan().find_task(t.task);
    past = past && p && p->start == t.start && p->workstation == t.workstation;
  }
  out.require(past, "committed past unchanged");

  const auto oracle = testing::exhaustive_schedule_search(r.residual);
  out.require(oracle.feasible && close(r.solution.objective, oracle.objective, 1e-9),
              "objective equals the residual optimum");

  sim.run_to_end();
  out.require(sim.detect_deviation().empty(), "execution follows the new plan");
  out.detail << "window " << r.window << ", objective " << r.solution.objective << ", oracle " << oracle.objective
             << ", replan " << secs << " s, final makespan " << sim.trajectory().makespan;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"line instance solved to the known optimum", criterion_line},
      {"tiny instances match exhaustive enumeration", criterion_tiny},
      {"random LPs satisfy KKT and match the tableau", criterion_lp},
      {"product linearization exact on the grid", criterion_linearization},
      {"checker accepts suite solutions", criterion_checker},
      {"MPS and LP round-trip", criterion_exchange},
      {"simulation reproduces the plan", criterion_simulation},
      {"delay replanning", criterion_replan},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome out;
    try {
      fn(out);
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail << " [exception: " << ex.what() << "]";
    }
    failed += !out.pass;
    std::printf("%s %d %s: %s\n", out.pass ? "PASS" : "FAIL", n, name, out.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
