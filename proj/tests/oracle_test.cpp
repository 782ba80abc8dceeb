#include <cmath>

#include "doctest.h"
#include "linea/bnb.hpp"
#include "oracles.hpp"

using namespace linea;

TEST_CASE("state search and enumeration agree on tiny instances") {
  std::mt19937 rng(2024);
  int compared = 0;
  int feasible = 0;
  for (int n = 0; n < 50; ++n) {
    const auto inst = testing::random_tiny_instance(rng);
    if (inst.objective.inventory_weight > 0) continue;
    ++compared;
    const auto enc = encode(inst);
    const auto bf = brute_force(enc.model);
    const auto dp = testing::exhaustive_schedule_search(inst);
    INFO("instance " << n);
    REQUIRE((bf.status == MILPStatus::Optimal) == dp.feasible);
    if (!dp.feasible) continue;
    ++feasible;
    CHECK(bf.objective == doctest::Approx(dp.objective).epsilon(1e-9));
  }
  CHECK(compared >= 20);
  CHECK(feasible >= 10);
}

TEST_CASE("state search on transport instances") {
  SUBCASE("shuttle") {
    const auto inst = testing::shuttle_instance();
    const auto dp = testing::exhaustive_schedule_search(inst);
    REQUIRE(dp.feasible);
    CHECK(dp.makespan == 6);
    CHECK(dp.start.at("task_a") == 0);
    CHECK(dp.start.at("task_b") == 5);
    const auto sol = solve_milp(encode(inst).model);
    CHECK(sol.objective == doctest::Approx(dp.objective).epsilon(1e-9));
  }
  SUBCASE("line") {
    const auto dp = testing::exhaustive_schedule_search(testing::two_task_line());
    REQUIRE(dp.feasible);
    CHECK(dp.makespan == 17);
    CHECK(dp.start.at("task1") == 0);
    CHECK(dp.start.at("task2") == 14);
  }
  SUBCASE("too short a horizon") {
    auto inst = testing::shuttle_instance();
    inst.horizon = 5;
    for (auto& t : inst.tasks) t.latest_finish = 5;
    CHECK_FALSE(testing::exhaustive_schedule_search(inst).feasible);
    CHECK(solve_milp(encode(inst).model).status == MILPStatus::Infeasible);
  }
}

TEST_CASE("state search refuses instances outside its scope") {
  auto two_units = testing::shuttle_instance();
  two_units.resources.push_back({"raw2", "raw", ResourceCategory::Consumable, 1});
  CHECK_THROWS(testing::exhaustive_schedule_search(two_units));

  auto two_carts = testing::shuttle_instance();
  auto cart = *two_carts.find_resource("cart");
  cart.id = "cart2";
  two_carts.resources.push_back(cart);
  CHECK_THROWS(testing::exhaustive_schedule_search(two_carts));
}
