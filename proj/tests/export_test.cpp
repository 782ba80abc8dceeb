#include <random>

#include "doctest.h"
#include "linea/exchange.hpp"
#include "linea/lp.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

MILPModel random_model(std::mt19937& rng) {
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> coef(-50.0, 50.0);
  std::uniform_int_distribution<int> pick(0, 5);
  MILPModel m;
  const int n = size(rng);
  for (int j = 0; j < n; ++j) {
    const bool bin = pick(rng) < 2;
    double lo = 0.0;
    double hi = 1.0;
    if (!bin) {
      switch (pick(rng)) {
        case 0: lo = -kInfinity; hi = kInfinity; break;
        case 1: lo = -kInfinity; hi = coef(rng); break;
        case 2: lo = coef(rng); hi = kInfinity; break;
        case 3: lo = hi = coef(rng); break;
        default: lo = -std::abs(coef(rng)); hi = std::abs(coef(rng)); break;
      }
    } else if (pick(rng) == 0) {
      lo = hi = static_cast<double>(pick(rng) % 2);
    }
    const double cost = pick(rng) == 0 ? 0.0 : coef(rng) / 7.0;
    m.add_column("x" + std::to_string(j), bin ? ColumnKind::Binary : ColumnKind::Continuous, lo, hi, cost);
  }
  const int rows = size(rng);
  for (int i = 0; i < rows; ++i) {
    std::vector<RowEntry> entries;
    for (int j = 0; j < n; ++j)
      if (pick(rng) < 3) entries.push_back({j, coef(rng) / 3.0});
    const auto sense = static_cast<RowSense>(pick(rng) % 3);
    m.add_row("c" + std::to_string(i), entries, sense, pick(rng) == 0 ? 0.0 : coef(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("MPS and LP round-trip random models exactly") {
  std::mt19937 rng(77);
  for (int n = 0; n < 200; ++n) {
    const auto m = random_model(rng);
    INFO("model " << n);
    const std::string mps = write_mps(m);
    const std::string lp = write_lp(m);
    const auto from_mps = read_mps(mps);
    const auto from_lp = read_lp(lp);
    CHECK(structurally_equal(m, from_mps, true));
    CHECK(structurally_equal(m, from_lp, true));
    CHECK(write_mps(m) == mps);
    CHECK(write_lp(m) == lp);
    CHECK(write_mps(from_mps) == mps);
    CHECK(write_lp(from_lp) == lp);
  }
}

TEST_CASE("encodings round-trip through both formats") {
  SUBCASE("transport line") {
    const auto enc = encode(testing::two_task_line());
    const std::string mps = write_mps(enc.model, "line");
    const std::string lp = write_lp(enc.model, "line");
    CHECK(structurally_equal(enc.model, read_mps(mps), true));
    CHECK(structurally_equal(enc.model, read_lp(lp), true));
    CHECK(write_mps(enc.model, "line") == mps);
    CHECK(write_lp(enc.model, "line") == lp);
  }
  SUBCASE("tiny instances") {
    std::mt19937 rng(11);
    for (int n = 0; n < 20; ++n) {
      const auto enc = encode(testing::random_tiny_instance(rng));
      CHECK(structurally_equal(enc.model, read_mps(write_mps(enc.model)), true));
      CHECK(structurally_equal(enc.model, read_lp(write_lp(enc.model)), true));
    }
  }
}

TEST_CASE("invalid and duplicate names are replaced") {
  MILPModel m;
  m.add_column("ok", ColumnKind::Continuous, 0, 1, 1.0);
  m.add_column("has space", ColumnKind::Continuous, 0, 1, 1.0);
  m.add_column("ok", ColumnKind::Continuous, 0, 1, 1.0);
  m.add_column("", ColumnKind::Binary, 0, 1, 1.0);
  m.add_column("3d", ColumnKind::Continuous, 0, 1, 1.0);
  m.add_column("free", ColumnKind::Continuous, 0, 1, 1.0);
  m.add_row("OBJ", {{0, 1.0}, {1, 1.0}}, RowSense::LessEqual, 1.0);
  m.add_row("a-b", {{2, 1.0}}, RowSense::GreaterEqual, 0.5);
  const auto cn = exported_column_names(m);
  CHECK(cn == std::vector<std::string>{"ok", "C1", "C2", "C3", "C4", "C5"});
  CHECK(exported_row_names(m) == std::vector<std::string>{"R0", "R1"});
  const auto back = read_mps(write_mps(m));
  CHECK(structurally_equal(m, back));
  CHECK(back.column(1).name == "C1");
  CHECK(structurally_equal(m, read_lp(write_lp(m))));
}

TEST_CASE("hand-written MPS is read") {
  const std::string text =
      "* a comment\n"
      "NAME          SAMPLE\n"
      "ROWS\n"
      " N  COST\n"
      " L  LIM1\n"
      " G  LIM2\n"
      " E  MYEQN\n"
      "COLUMNS\n"
      "    X1        COST         1.0   LIM1         1.0\n"
      "    X1        LIM2         1.0\n"
      "    MARKER                 'MARKER'                 'INTORG'\n"
      "    X2        COST         2.0   LIM1         1.0\n"
      "    X2        MYEQN       -1.0\n"
      "    MARKER                 'MARKER'                 'INTEND'\n"
      "    X3        COST        -1.0   MYEQN        1.0\n"
      "RHS\n"
      "    RHS       LIM1         4.0   LIM2         1.0\n"
      "    RHS       MYEQN        7.0\n"
      "BOUNDS\n"
      " UP BND       X1           4.0\n"
      " MI BND       X3\n"
      " UP BND       X3           9\n"
      "ENDATA\n";
  const auto m = read_mps(text);
  REQUIRE(m.num_columns() == 3);
  REQUIRE(m.num_rows() == 3);
  CHECK(m.column(1).kind == ColumnKind::Binary);
  CHECK(m.column(1).upper == 1.0);
  CHECK(m.column(0).upper == 4.0);
  CHECK(m.column(2).lower == -kInfinity);
  CHECK(m.column(2).upper == 9.0);
  CHECK(m.column(2).cost == -1.0);
  CHECK(m.row(2).sense == RowSense::Equal);
  CHECK(m.row(2).rhs == 7.0);
  CHECK(m.row(2).entries.size() == 2);
}

TEST_CASE("hand-written LP is read") {
  const std::string text =
      "\\ sample\n"
      "Maximize\n"
      " profit: 3 x + 2y_1\n"
      "   - z\n"
      "Subject To\n"
      " c1: x + y_1 <= 4\n"
      " c2: x + 3 y_1 >= -2.5e-1\n"
      " -x + z = 0\n"
      "Bounds\n"
      " x <= 10\n"
      " -inf <= z <= 3\n"
      " y_1 free\n"
      "Binary\n"
      " b\n"
      "End\n";
  // "2y_1" is a single name token, so it is rejected as an invalid name.
  CHECK_THROWS_AS(read_lp(text), Error);

  std::string fixed = text;
  fixed.replace(fixed.find("2y_1"), 4, "2 y_1");
  const auto m = read_lp(fixed);
  REQUIRE(m.num_columns() == 4);
  CHECK(m.column(0).cost == -3.0);
  CHECK(m.column(1).cost == -2.0);
  CHECK(m.column(2).cost == 1.0);
  CHECK(m.column(0).upper == 10.0);
  CHECK(m.column(1).lower == -kInfinity);
  CHECK(m.column(2).lower == -kInfinity);
  CHECK(m.column(3).kind == ColumnKind::Binary);
  CHECK(m.column(3).upper == 1.0);
  CHECK(m.row(1).rhs == -0.25);
  CHECK(m.row(2).name == "R2");
  CHECK(m.row(2).sense == RowSense::Equal);
}

TEST_CASE("malformed text is rejected") {
  CHECK_THROWS_AS(read_mps("NAME x\nROWS\n N OBJ\n"), Error);
  CHECK_THROWS_AS(read_mps("NAME x\nRANGES\nENDATA\n"), Error);
  CHECK_THROWS_AS(read_mps("ROWS\n N OBJ\nCOLUMNS\n    x  NOPE  1\nENDATA\n"), Error);
  CHECK_THROWS_AS(read_mps("ROWS\n N OBJ\nCOLUMNS\n    x  OBJ  one\nENDATA\n"), Error);
  CHECK_THROWS_AS(read_mps("ROWS\n N OBJ\nCOLUMNS\n    MARKER 'MARKER' 'INTORG'\n    x  OBJ  1\n"
                           "    MARKER 'MARKER' 'INTEND'\nBOUNDS\n UP BND x 3\nENDATA\n"),
                  Error);
  CHECK_THROWS_AS(read_lp("Subject To\n c: x <= 1\nEnd\n"), Error);
  CHECK_THROWS_AS(read_lp("Minimize\n x\nSubject To\n c: x 1\nEnd\n"), Error);
  CHECK_THROWS_AS(read_lp("Minimize\n x\nEnd\n extra"), Error);
}

TEST_CASE("an exported model solves to the same optimum") {
  std::mt19937 rng(3);
  const auto enc = encode(testing::random_tiny_instance(rng));
  const auto a = solve_lp(relaxation(enc.model));
  const auto b = solve_lp(relaxation(read_lp(write_lp(enc.model))));
  REQUIRE(a.status == b.status);
  if (a.status == LPStatus::Optimal) CHECK(a.objective == doctest::Approx(b.objective));
}
