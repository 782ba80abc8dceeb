#include <chrono>
#include <cmath>

#include "doctest.h"
#include "linea/lp.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

LPProblem box(int n, double lo, double hi) {
  LPProblem lp;
  lp.num_cols = n;
  lp.col_lower.assign(n, lo);
  lp.col_upper.assign(n, hi);
  lp.cost.assign(n, 0.0);
  return lp;
}

}  // namespace

TEST_CASE("trivial bounded LP") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, 0 <= x,y <= 10 -> x = 1.6, y = 1.2
  auto lp = box(2, 0, 10);
  lp.cost = {-1, -1};
  lp.add_row({{0, 1}, {1, 2}}, RowSense::LessEqual, 4);
  lp.add_row({{0, 3}, {1, 1}}, RowSense::LessEqual, 6);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.6));
  CHECK(sol.x[1] == doctest::Approx(1.2));
  CHECK(sol.objective == doctest::Approx(-2.8));
  CHECK(check_kkt(lp, sol).max() <= 1e-9);
  CHECK(dual_objective(lp, sol) == doctest::Approx(sol.objective));
}

TEST_CASE("infeasible and unbounded") {
  auto lp = box(1, 0, 1);
  lp.add_row({{0, 1}}, RowSense::GreaterEqual, 2);
  CHECK(solve_lp(lp).status == LPStatus::Infeasible);
  CHECK(testing::dense_tableau(lp).status == LPStatus::Infeasible);

  auto lp2 = box(2, 0, kInfinity);
  lp2.cost = {-1, 0};
  lp2.add_row({{0, 1}, {1, -1}}, RowSense::LessEqual, 1);
  CHECK(solve_lp(lp2).status == LPStatus::Unbounded);
}

TEST_CASE("free columns and equalities") {
  auto lp = box(3, -kInfinity, kInfinity);
  lp.cost = {1, 1, 1};
  lp.col_lower[2] = -1;
  lp.col_upper[2] = 1;
  lp.add_row({{0, 1}, {1, -1}}, RowSense::Equal, 2);
  lp.add_row({{0, 1}, {1, 1}}, RowSense::GreaterEqual, 0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(check_kkt(lp, sol).max() <= 1e-9);
}

TEST_CASE("degenerate cycling example terminates") {
  // Beale's example, which cycles under the textbook Dantzig rule.
  auto lp = box(4, 0, kInfinity);
  lp.cost = {-0.75, 150, -0.02, 6};
  lp.add_row({{0, 0.25}, {1, -60}, {2, -0.04}, {3, 9}}, RowSense::LessEqual, 0);
  lp.add_row({{0, 0.5}, {1, -90}, {2, -0.02}, {3, 3}}, RowSense::LessEqual, 0);
  lp.add_row({{2, 1}}, RowSense::LessEqual, 1);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-0.05));
  CHECK(testing::dense_tableau(lp).objective == doctest::Approx(-0.05));
}

TEST_CASE("random bounded LPs agree with the dense tableau oracle") {
  std::mt19937 rng(20240611);
  int optimal = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) {
    std::uniform_int_distribution<int> rows(3, 25);
    std::uniform_int_distribution<int> cols(3, 30);
    const auto lp = testing::random_lp(rng, rows(rng), cols(rng));
    const auto sol = solve_lp(lp);
    const auto ref = testing::dense_tableau(lp);
    CAPTURE(i);
    REQUIRE(sol.status == ref.status);
    if (sol.status != LPStatus::Optimal) continue;
    ++optimal;
    CHECK(check_kkt(lp, sol).max() <= 1e-7);
    CHECK(rel_gap(sol.objective, ref.objective) <= 1e-7);
    CHECK(rel_gap(dual_objective(lp, sol), sol.objective) <= 1e-7);
  }
  CHECK(optimal == 100);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("100 random LPs in " << secs << " s");
}

TEST_CASE("weak duality on perturbed duals") {
  std::mt19937 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto lp = testing::random_lp(rng, 8, 10);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(dual_objective(lp, sol) <= sol.objective + 1e-7);
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937 rng(99);
  const auto lp = testing::random_lp(rng, 20, 25);
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("warm start after a bound change") {
  std::mt19937 rng(3);
  const auto lp = testing::random_lp(rng, 15, 20);
  SimplexSolver solver(lp);
  const auto first = solver.solve();
  REQUIRE(first.status == LPStatus::Optimal);
  int j = 0;
  while (j < lp.num_cols && first.x[j] <= lp.col_lower[j] + 1e-6) ++j;
  REQUIRE(j < lp.num_cols);
  const double newhi = lp.col_lower[j] + 0.5 * (first.x[j] - lp.col_lower[j]);
  solver.set_column_bounds(j, lp.col_lower[j], newhi);
  const auto warm = solver.solve(&first.basis);

  auto changed = lp;
  changed.col_upper[j] = newhi;
  const auto cold = solve_lp(changed);
  const auto ref = testing::dense_tableau(changed);
  REQUIRE(warm.status == ref.status);
  if (ref.status == LPStatus::Optimal) {
    CHECK(rel_gap(warm.objective, ref.objective) <= 1e-7);
    CHECK(rel_gap(cold.objective, ref.objective) <= 1e-7);
    CHECK(check_kkt(changed, warm).max() <= 1e-7);
  }
}

TEST_CASE("dual reoptimization after repeated branching-style bound changes") {
  std::mt19937 rng(7);
  int checked = 0;
  for (int t = 0; t < 120; ++t) {
    const auto lp = testing::random_lp(rng, 3 + t % 8, 3 + t % 11);
    SimplexSolver solver(lp);
    auto current = solver.solve();
    REQUIRE(current.status == LPStatus::Optimal);
    for (int rep = 0; rep < 5; ++rep) {
      const int j = static_cast<int>(rng() % lp.num_cols);
      double lo = solver.column_lower(j);
      double hi = solver.column_upper(j);
      if (rng() % 2)
        hi = std::floor(current.x[j]);
      else
        lo = std::ceil(current.x[j]);
      if (lo > hi) continue;
      solver.set_column_bounds(j, lo, hi);
      const auto warm = solver.solve(&current.basis);

      auto changed = lp;
      for (int c = 0; c < lp.num_cols; ++c) {
        changed.col_lower[c] = solver.column_lower(c);
        changed.col_upper[c] = solver.column_upper(c);
      }
      const auto ref = testing::dense_tableau(changed);
      REQUIRE(warm.status == ref.status);
      ++checked;
      if (ref.status != LPStatus::Optimal) break;
      CHECK(rel_gap(warm.objective, ref.objective) <= 1e-7);
      CHECK(check_kkt(changed, warm).max() <= 1e-7);
      current = warm;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("objective cutoff stops a warm-started solve") {
  std::mt19937 rng(11);
  int exercised = 0;
  for (int t = 0; t < 40 && exercised < 5; ++t) {
    const auto lp = testing::random_lp(rng, 12, 16);
    SimplexSolver solver(lp);
    const auto first = solver.solve();
    REQUIRE(first.status == LPStatus::Optimal);
    for (int j = 0; j < lp.num_cols; ++j) {
      if (first.x[j] <= lp.col_lower[j] + 1e-3) continue;
      auto changed = lp;
      changed.col_upper[j] = lp.col_lower[j];
      const auto ref = testing::dense_tableau(changed);
      if (ref.status != LPStatus::Optimal || ref.objective <= first.objective + 1e-3) continue;

      solver.set_column_bounds(j, lp.col_lower[j], lp.col_lower[j]);
      solver.set_objective_cutoff(first.objective + 0.5 * (ref.objective - first.objective));
      const auto cut = solver.solve(&first.basis);
      CHECK(cut.status == LPStatus::Cutoff);
      solver.set_objective_cutoff(kInfinity);
      const auto full = solver.solve(&first.basis);
      REQUIRE(full.status == LPStatus::Optimal);
      CHECK(rel_gap(full.objective, ref.objective) <= 1e-7);
      solver.set_column_bounds(j, lp.col_lower[j], lp.col_upper[j]);
      ++exercised;
      break;
    }
  }
  CHECK(exercised == 5);
}
