#include <cmath>
#include <set>

#include "doctest.h"
#include "linea/milp.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

ProblemInstance single_task(int duration, int horizon) {
  ProblemInstance inst;
  inst.horizon = horizon;
  inst.workstations.push_back({});
  inst.workstations[0].id = 1;
  inst.workstations[0].occupancy_max = 1;
  TaskSpec t;
  t.id = "only";
  t.duration = duration;
  t.earliest_start = 0;
  t.latest_finish = horizon;
  t.eligible_workstations = {1};
  inst.tasks.push_back(t);
  return inst;
}

ProblemInstance chain(int horizon, DependencyKind kind) {
  auto inst = single_task(2, horizon);
  TaskSpec t = inst.tasks[0];
  t.id = "second";
  t.duration = 3;
  inst.tasks.push_back(t);
  inst.workstations[0].occupancy_max = 2;
  inst.dependencies.push_back({"only", "second", kind});
  return inst;
}

const Row* row_named(const MILPModel& m, const std::string& name) {
  for (const auto& r : m.rows())
    if (r.name == name) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("catalog is a bijection and binaries are unit bounded") {
  std::mt19937 rng(7);
  std::vector<ProblemInstance> cases{testing::two_task_line(), chain(8, DependencyKind::FinishToStart)};
  for (int i = 0; i < 10; ++i) cases.push_back(testing::random_tiny_instance(rng));
  for (const auto& inst : cases) {
    const auto enc = encode(inst);
    REQUIRE(enc.catalog.size() == enc.model.num_columns());
    std::set<VarKey> seen;
    for (int j = 0; j < enc.model.num_columns(); ++j) {
      const auto& key = enc.catalog.key_of(j);
      CHECK(enc.catalog.find(key) == j);
      CHECK(seen.insert(key).second);
      const auto& c = enc.model.column(j);
      if (c.kind == ColumnKind::Binary) {
        CHECK(c.lower >= 0.0);
        CHECK(c.upper <= 1.0);
      }
    }
    for (const auto& r : enc.model.rows())
      for (const auto& e : r.entries) {
        CHECK(e.value != 0.0);
        CHECK(e.column < enc.model.num_columns());
      }
  }
}

TEST_CASE("closed-form family counts match the catalog") {
  std::mt19937 rng(11);
  std::vector<ProblemInstance> cases{testing::two_task_line(), chain(9, DependencyKind::StartToFinish)};
  for (int i = 0; i < 20; ++i) cases.push_back(testing::random_tiny_instance(rng));
  for (const auto& inst : cases) {
    const auto enc = encode(inst);
    auto predicted = closed_form_counts(inst);
    auto actual = enc.catalog.family_counts();
    for (auto it = predicted.begin(); it != predicted.end();)
      it = it->second == 0 ? predicted.erase(it) : std::next(it);
    CHECK(predicted == actual);
  }
}

TEST_CASE("start columns exist only inside the window") {
  auto inst = chain(10, DependencyKind::FinishToStart);
  inst.tasks[1].earliest_start = 2;
  inst.tasks[1].latest_finish = 8;
  const auto enc = encode(inst);
  for (int k = 0; k < inst.horizon; ++k) {
    CHECK((enc.catalog.find({Family::Start, 1, k}) >= 0) == (k >= 2 && k <= 5));
    CHECK((enc.catalog.find({Family::Start, 0, k}) >= 0) == (k <= 8));
  }
}

TEST_CASE("precedence rows expand to start-time coefficients") {
  // Hand expansion of the precedence inequalities over start columns:
  //   FS: d' + sum k s(t',k) <= sum k s(t,k)
  //   SS: sum k s(t',k) <= sum k s(t,k)
  //   FF: d' + sum k s(t',k) <= d + sum k s(t,k)
  //   SF: sum k s(t',k) <= d + sum k s(t,k)
  const int K = 7;
  const int dp = 2;
  const int ds = 3;
  struct Case {
    DependencyKind kind;
    double rhs;
  };
  for (auto c : {Case{DependencyKind::FinishToStart, -dp}, Case{DependencyKind::StartToStart, 0.0},
                 Case{DependencyKind::FinishToFinish, double(ds - dp)}, Case{DependencyKind::StartToFinish, double(ds)}}) {
    const auto inst = chain(K, c.kind);
    const auto enc = encode(inst);
    const Row* r = row_named(enc.model, "precedence_0");
    REQUIRE(r != nullptr);
    CHECK(r->sense == RowSense::LessEqual);
    CHECK(r->rhs == c.rhs);
    std::map<int, double> expect;
    for (int k = 1; k <= K - dp; ++k) expect[enc.catalog.at({Family::Start, 0, k})] = k;
    for (int k = 1; k <= K - ds; ++k) expect[enc.catalog.at({Family::Start, 1, k})] = -k;
    std::map<int, double> got;
    for (const auto& e : r->entries) got[e.column] = e.value;
    CHECK(got == expect);
  }
}

TEST_CASE("single task with horizon equal to duration has one start") {
  const auto inst = single_task(4, 4);
  const auto enc = encode(inst);
  CHECK(enc.catalog.find({Family::Start, 0, 0}) >= 0);
  CHECK(enc.catalog.find({Family::Start, 0, 1}) < 0);
  CHECK(enc.hints.empty());
}

TEST_CASE("unreachable dependency chain yields a hint") {
  auto inst = chain(5, DependencyKind::FinishToStart);
  inst.tasks[1].latest_finish = 4;
  REQUIRE(validate(inst).empty());
  const auto enc = encode(inst);
  CHECK_FALSE(enc.hints.empty());
  CHECK(enc.model.num_rows() > 0);
}

TEST_CASE("encoding rejects invalid instances") {
  auto inst = single_task(3, 5);
  inst.tasks[0].eligible_workstations = {4};
  CHECK_THROWS_AS(encode(inst), ValidationError);
}

TEST_CASE("encoding is deterministic") {
  const auto inst = testing::two_task_line();
  const auto a = encode(inst);
  const auto b = encode(inst);
  CHECK(structurally_equal(a.model, b.model, true));
}

TEST_CASE("line instance stays in the expected size range") {
  const auto enc = encode(testing::two_task_line());
  const auto stats = model_stats(enc.model);
  MESSAGE("binaries=" << stats.binary_columns << " continuous=" << stats.continuous_columns
                      << " rows=" << stats.rows << " nnz=" << stats.nonzeros);
  const int cols = stats.binary_columns + stats.continuous_columns;
  CHECK(cols > 300);
  CHECK(cols < 20000);
}

TEST_CASE("product linearization is exact on the integral grid") {
  // Bound pairs: straddling zero, strictly positive, strictly negative.
  const std::pair<double, double> bounds[] = {{-2.0, 3.0}, {0.5, 4.0}, {-5.0, -1.0}};
  for (auto [lo, hi] : bounds) {
    MILPModel m;
    const int b = m.add_column("b", ColumnKind::Binary, 0, 1);
    const int x = m.add_column("x", ColumnKind::Continuous, lo, hi);
    const auto lin = linearize_product(m, b, x, "z");
    REQUIRE(m.num_rows() == 4);
    for (int bv = 0; bv <= 1; ++bv)
      for (int i = 0; i < 5; ++i) {
        const double xv = lo + (hi - lo) * i / 4.0;
        // Each row has unit coefficient on z, so it yields one bound on z.
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
          REQUIRE(zc == 1.0);
          const double bound = row.rhs - rest;
          if (row.sense == RowSense::LessEqual) zhi = std::min(zhi, bound);
          if (row.sense == RowSense::GreaterEqual) zlo = std::max(zlo, bound);
        }
        const double want = bv * xv;
        CAPTURE(lo);
        CAPTURE(hi);
        CAPTURE(bv);
        CAPTURE(xv);
        CHECK(std::abs(zlo - want) <= 1e-12);
        CHECK(std::abs(zhi - want) <= 1e-12);
      }
  }
}

TEST_CASE("linearization preconditions") {
  MILPModel m;
  const int b = m.add_column("b", ColumnKind::Binary, 0, 1);
  const int x = m.add_column("x", ColumnKind::Continuous, 0, 1e308 * 10);
  const int y = m.add_column("y", ColumnKind::Continuous, 0, 1);
  CHECK_THROWS(linearize_product(m, b, x, "z"));
  CHECK_THROWS(linearize_product(m, y, b, "z"));
}
