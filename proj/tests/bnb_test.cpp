#include <atomic>
#include <chrono>
#include <cmath>

#include "doctest.h"
#include "linea/bnb.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

bool close(double a, double b, double tol = 1e-6) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("an integral root relaxation needs a single node") {
  MILPModel m;
  const int x = m.add_column("x", ColumnKind::Binary, 0, 1, 1.0);
  const int y = m.add_column("y", ColumnKind::Binary, 0, 1, 2.0);
  m.add_row("cover", {{x, 1.0}, {y, 1.0}}, RowSense::GreaterEqual, 1.0);
  const auto sol = solve_milp(m);
  REQUIRE(sol.status == MILPStatus::Optimal);
  CHECK(sol.nodes == 1);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.x[x] == doctest::Approx(1.0));
  CHECK(sol.x[y] == doctest::Approx(0.0));
}

TEST_CASE("small knapsack") {
  MILPModel m;
  const int a = m.add_column("a", ColumnKind::Binary, 0, 1, -2.0);
  const int b = m.add_column("b", ColumnKind::Binary, 0, 1, -3.0);
  const int c = m.add_column("c", ColumnKind::Binary, 0, 1, -4.0);
  m.add_row("weight", {{a, 2.0}, {b, 3.0}, {c, 4.5}}, RowSense::LessEqual, 5.0);
  const auto sol = solve_milp(m);
  REQUIRE(sol.status == MILPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-5.0));
  CHECK(sol.x[a] == doctest::Approx(1.0));
  CHECK(sol.x[b] == doctest::Approx(1.0));
  CHECK(sol.x[c] == doctest::Approx(0.0));
  const auto oracle = brute_force(m);
  CHECK(oracle.objective == doctest::Approx(-5.0));
}

TEST_CASE("mixed model with continuous columns") {
  MILPModel m;
  const int open = m.add_column("open", ColumnKind::Binary, 0, 1, 10.0);
  const int flow = m.add_column("flow", ColumnKind::Continuous, 0, 8, -3.0);
  m.add_row("link", {{flow, 1.0}, {open, -8.0}}, RowSense::LessEqual, 0.0);
  m.add_row("cap", {{flow, 2.0}}, RowSense::LessEqual, 9.0);
  const auto sol = solve_milp(m);
  REQUIRE(sol.status == MILPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(10.0 - 13.5));
  CHECK(brute_force(m).objective == doctest::Approx(sol.objective));
}

TEST_CASE("infeasible model") {
  MILPModel m;
  const int x = m.add_column("x", ColumnKind::Binary, 0, 1, 1.0);
  const int y = m.add_column("y", ColumnKind::Binary, 0, 1, 1.0);
  m.add_row("both", {{x, 1.0}, {y, 1.0}}, RowSense::Equal, 1.5);
  CHECK(solve_milp(m).status == MILPStatus::Infeasible);
  CHECK(brute_force(m).status == MILPStatus::Infeasible);
}

TEST_CASE("brute force refuses oversized models") {
  MILPModel m;
  for (int j = 0; j < 5; ++j) m.add_column("b" + std::to_string(j), ColumnKind::Binary, 0, 1);
  CHECK_THROWS_AS(brute_force(m, 4), Error);
}

TEST_CASE("tiny random instances agree with exhaustive enumeration") {
  std::mt19937 rng(2024);
  const auto begin = std::chrono::steady_clock::now();
  int feasible = 0;
  for (int n = 0; n < 50; ++n) {
    const auto inst = testing::random_tiny_instance(rng);
    const auto enc = encode(inst);
    const auto bb = solve_milp(enc.model);
    const auto ex = brute_force(enc.model);
    INFO("instance " << n);
    REQUIRE(bb.status != MILPStatus::Limit);
    REQUIRE(bb.status != MILPStatus::Feasible);
    CHECK((bb.status == MILPStatus::Optimal) == (ex.status == MILPStatus::Optimal));
    if (bb.status == MILPStatus::Optimal && ex.status == MILPStatus::Optimal) {
      ++feasible;
      CHECK(close(bb.objective, ex.objective));
      CHECK(enc.model.max_violation(bb.x) <= 1e-6);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  CHECK(feasible >= 25);
  CHECK(seconds < 60.0);
}

TEST_CASE("node order does not change the optimum") {
  std::mt19937 rng(99);
  for (int n = 0; n < 10; ++n) {
    const auto enc = encode(testing::random_tiny_instance(rng));
    SolveParams dfs;
    dfs.order = NodeOrder::DepthFirst;
    const auto a = solve_milp(enc.model);
    const auto b = solve_milp(enc.model, dfs);
    REQUIRE(a.status == b.status);
    if (a.status == MILPStatus::Optimal) CHECK(close(a.objective, b.objective));
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937 rng(5);
  const auto enc = encode(testing::random_tiny_instance(rng));
  const auto a = solve_milp(enc.model);
  const auto b = solve_milp(enc.model);
  CHECK(a.status == b.status);
  CHECK(a.x == b.x);
  CHECK(a.nodes == b.nodes);
  CHECK(a.lp_iterations == b.lp_iterations);
}

TEST_CASE("limits, cancellation and progress reporting") {
  MILPModel m;
  std::vector<RowEntry> weight;
  for (int j = 0; j < 14; ++j) {
    const int c = m.add_column("b" + std::to_string(j), ColumnKind::Binary, 0, 1, -(10.0 + (j * 7) % 11));
    weight.push_back({c, 5.0 + (j * 5) % 9});
  }
  m.add_row("weight", weight, RowSense::LessEqual, 31.5);

  SUBCASE("node limit") {
    SolveParams p;
    p.node_limit = 1;
    const auto sol = solve_milp(m, p);
    CHECK((sol.status == MILPStatus::Feasible || sol.status == MILPStatus::Limit));
    CHECK(sol.nodes <= 1);
  }
  SUBCASE("cancel flag set before the solve") {
    std::atomic<bool> cancel{true};
    SolveParams p;
    p.cancel = &cancel;
    const auto sol = solve_milp(m, p);
    CHECK((sol.status == MILPStatus::Feasible || sol.status == MILPStatus::Limit));
  }
  SUBCASE("progress callback") {
    SolveParams p;
    p.progress_every = 1;
    long calls = 0;
    double last_bound = -kInfinity;
    bool monotone = true;
    p.on_progress = [&](const Progress& pr) {
      ++calls;
      if (pr.bound < last_bound - 1e-9) monotone = false;
      last_bound = pr.bound;
    };
    const auto sol = solve_milp(m, p);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(calls >= 1);
    CHECK(monotone);
    CHECK(close(sol.objective, brute_force(m).objective));
  }
}
