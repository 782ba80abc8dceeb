#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "linea/sim.hpp"
#include "oracles.hpp"

using namespace linea;

namespace {

Schedule optimal_plan(const ProblemInstance& inst) {
  const auto enc = encode(inst);
  const auto sol = solve_milp(enc.model);
  REQUIRE(sol.status == MILPStatus::Optimal);
  return decode_schedule(sol, enc, inst);
}

bool has_event(const Simulator& sim, const std::string& kind, const std::string& subject) {
  const auto& ev = sim.events();
  return std::any_of(ev.begin(), ev.end(), [&](const SimEvent& e) { return e.kind == kind && e.subject == subject; });
}

const TaskState& task_state(const Simulator& sim, const std::string& id) {
  for (const auto& t : sim.tasks())
    if (t.task == id) return t;
  FAIL("no task " << id);
  return sim.tasks().front();
}

void check_trajectory_matches(const Schedule& traj, const Schedule& plan) {
  auto sorted = [](std::vector<TaskPlan> v) {
    std::sort(v.begin(), v.end(), [](const TaskPlan& a, const TaskPlan& b) { return a.task < b.task; });
    return v;
  };
  CHECK(sorted(traj.tasks) == sorted(plan.tasks));
  CHECK(traj.departures == plan.departures);
  CHECK(traj.vehicles == plan.vehicles);
  CHECK(traj.resources == plan.resources);
  CHECK(traj.buffers == plan.buffers);
  CHECK(traj.occupancy == plan.occupancy);
  CHECK(traj.makespan == plan.makespan);
}

// Residual replanning must reach the exhaustive optimum and pass the checker.
void check_replan(const ReplanResult& r) {
  REQUIRE(r.applied);
  const auto violations = check_schedule(r.residual, r.schedule);
  for (const auto& v : violations) INFO(v.rule << ": " << v.message);
  CHECK(violations.empty());
  const auto oracle = testing::exhaustive_schedule_search(r.residual);
  REQUIRE(oracle.feasible);
  CHECK(r.solution.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
}

}  // namespace

TEST_CASE("an undisturbed run reproduces the plan") {
  SUBCASE("shuttle") {
    const auto inst = testing::shuttle_instance();
    const auto plan = optimal_plan(inst);
    Simulator sim(inst, plan);
    while (!sim.finished()) {
      sim.step();
      CHECK(sim.detect_deviation().empty());
    }
    check_trajectory_matches(sim.trajectory(), plan);
    CHECK(has_event(sim, "depart", "cart"));
    CHECK(has_event(sim, "credit", "part"));
    CHECK(has_event(sim, "consume", "raw"));
    CHECK_FALSE(has_event(sim, "blocked", "task_b"));
    CHECK_THROWS_AS(sim.step(), Error);
  }
  SUBCASE("tiny instances") {
    std::mt19937 rng(99);
    int runs = 0;
    for (int n = 0; n < 30; ++n) {
      const auto inst = testing::random_tiny_instance(rng);
      const auto enc = encode(inst);
      const auto sol = solve_milp(enc.model);
      if (sol.status != MILPStatus::Optimal) continue;
      ++runs;
      const auto plan = decode_schedule(sol, enc, inst);
      Simulator sim(inst, plan);
      sim.run_to_end();
      INFO("instance " << n);
      check_trajectory_matches(sim.trajectory(), plan);
    }
    CHECK(runs >= 10);
  }
}

TEST_CASE("a task delay is detected and replanned") {
  const auto inst = testing::shuttle_instance();
  const auto plan = optimal_plan(inst);
  Simulator sim(inst, plan);
  sim.step();
  sim.inject({AnomalyKind::TaskDelay, "task_a", 0, 2, 1.0, {}});
  CHECK(task_state(sim, "task_a").finish == 4);
  const auto devs = sim.detect_deviation();
  REQUIRE(devs.size() == 1);
  CHECK(devs[0].subject == "task_a");
  CHECK(devs[0].message == "finishes at 4 instead of 2");

  const auto res = sim.residual_instance();
  const auto* pinned = res.find_task("task_a");
  REQUIRE(pinned);
  CHECK(pinned->duration == 3);
  CHECK(pinned->inputs.empty());
  CHECK(pinned->eligible_workstations == std::vector<WorkstationId>{1});
  CHECK(res.find_resource("raw")->initial_location == kStorageNode);

  const Schedule before = sim.trajectory();
  const auto r = sim.replan();
  check_replan(r);
  CHECK(r.clock == 1);
  // The executed past is unchanged by the new plan.
  const Schedule& merged = sim.plan();
  for (const auto* list : {&before.vehicles, &before.resources})
    for (const auto& t : *list)
      for (int s = 0; s <= 1; ++s) CHECK(merged.find_track(t.resource)->steps[s] == t.steps[s]);
  CHECK(merged.find_task("task_a")->start == 0);
  CHECK(merged.find_task("task_a")->finish == 4);
  CHECK(merged.find_task("task_b")->start == 7);
  CHECK(sim.detect_deviation().empty());

  sim.run_to_end();
  CHECK(task_state(sim, "task_b").start == 7);
  CHECK(task_state(sim, "task_b").phase == TaskPhase::Done);
  CHECK(sim.trajectory().makespan == 8);
  CHECK(sim.detect_deviation().empty());
  CHECK(has_event(sim, "replan", "shuttle@1"));
}

TEST_CASE("replanning while outputs are being credited") {
  const auto inst = testing::shuttle_instance();
  const auto plan = optimal_plan(inst);
  Simulator sim(inst, plan);
  sim.run(2);
  REQUIRE(task_state(sim, "task_a").phase == TaskPhase::Done);
  const auto res = sim.residual_instance();
  const auto* part = res.find_resource("part");
  REQUIRE(part->transit);
  CHECK(part->transit->from == kStorageNode);
  CHECK(part->transit->to == 1);
  CHECK(part->transit->arrival_step == 1);
  CHECK(validate(res).empty());

  const auto r = sim.replan();
  check_replan(r);
  CHECK(sim.plan().find_task("task_b")->start == plan.find_task("task_b")->start);
  sim.run_to_end();
  check_trajectory_matches(sim.trajectory(), plan);
}

TEST_CASE("disturbances hold back dependent work") {
  const auto inst = testing::shuttle_instance();
  const auto plan = optimal_plan(inst);
  REQUIRE(plan.find_task("task_b")->start == 5);

  SUBCASE("vehicle slowdown") {
    Simulator sim(inst, plan);
    sim.inject({AnomalyKind::VehicleSlowdown, "cart", 0, 0, 0.5, {}});
    sim.run(5);
    CHECK(sim.position("part").moving);
    CHECK_FALSE(sim.detect_deviation().empty());
    CHECK(has_event(sim, "blocked", "task_b"));
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 7);
    const auto res_sim = Simulator(inst, plan);
    CHECK(res_sim.default_window() == 10);
  }
  SUBCASE("unit unavailable") {
    Simulator sim(inst, plan);
    sim.inject({AnomalyKind::ResourceUnavailable, "fixture", 0, 0, 1.0, {0, 7}});
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 7);
  }
  SUBCASE("workstation down") {
    Simulator sim(inst, plan);
    sim.inject({AnomalyKind::WorkstationDown, "", 2, 0, 1.0, {4, 6}});
    sim.run(3);
    const auto res = sim.residual_instance();
    CHECK(res.find_workstation(2)->down == std::vector<StepWindow>{{1, 3}});
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 6);
    // The blocked start is reported once, not at every retry.
    const auto& ev = sim.events();
    CHECK(std::count_if(ev.begin(), ev.end(), [](const SimEvent& e) { return e.kind == "blocked"; }) == 1);
  }
  SUBCASE("replanning around a slowdown") {
    Simulator sim(inst, plan);
    sim.run(1);
    sim.inject({AnomalyKind::VehicleSlowdown, "cart", 0, 0, 0.5, {}});
    const auto res = sim.residual_instance();
    CHECK(res.find_resource("cart")->velocity == doctest::Approx(0.25));
    check_replan(sim.replan());
    CHECK(sim.plan().find_task("task_b")->start == 7);
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 7);
    CHECK(sim.detect_deviation().empty());
  }
}

TEST_CASE("replanning while the vehicle is on an edge") {
  const auto inst = testing::shuttle_instance();
  const auto plan = optimal_plan(inst);

  SUBCASE("outage ahead") {
    Simulator sim(inst, plan);
    sim.run(4);
    REQUIRE(sim.position("cart").moving);
    sim.inject({AnomalyKind::WorkstationDown, "", 2, 0, 1.0, {5, 7}});
    const auto res = sim.residual_instance();
    const auto* cart = res.find_resource("cart");
    const auto* part = res.find_resource("part");
    REQUIRE(cart->transit);
    REQUIRE(part->transit);
    CHECK(cart->transit->arrival_step == 1);
    CHECK(part->transit->carrier == "cart");
    CHECK(validate(res).empty());
    check_replan(sim.replan());
    CHECK(sim.plan().find_task("task_b")->start == 7);
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 7);
    CHECK(sim.detect_deviation().empty());
  }
  SUBCASE("slow trip") {
    Simulator sim(inst, plan);
    sim.inject({AnomalyKind::VehicleSlowdown, "cart", 0, 0, 0.5, {}});
    sim.run(4);
    const auto r = sim.replan(2);
    // The trip ends at 7, so the window grows to reach it.
    CHECK(r.window == 4);
    check_replan(r);
    CHECK(sim.plan().find_task("task_b")->start == 7);
    sim.run_to_end();
    CHECK(task_state(sim, "task_b").start == 7);
    CHECK(sim.detect_deviation().empty());
  }
}

TEST_CASE("automatic replanning follows a deviation") {
  const auto inst = testing::shuttle_instance();
  SimOptions opts;
  opts.auto_replan = true;
  Simulator sim(inst, optimal_plan(inst), opts);
  sim.step();
  sim.inject({AnomalyKind::TaskDelay, "task_a", 0, 1, 1.0, {}});
  CHECK(has_event(sim, "replan", "shuttle@1"));
  CHECK(sim.plan().find_task("task_b")->start == 6);
  sim.run_to_end();
  CHECK(task_state(sim, "task_b").start == 6);
}

TEST_CASE("invalid disturbances are rejected") {
  const auto inst = testing::shuttle_instance();
  const auto plan = optimal_plan(inst);
  Simulator sim(inst, plan);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::TaskDelay, "nope", 0, 1, 1.0, {}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::TaskDelay, "task_a", 0, 0, 1.0, {}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::VehicleSlowdown, "raw", 0, 0, 0.5, {}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::VehicleSlowdown, "cart", 0, 0, 0.0, {}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::ResourceUnavailable, "cart", 0, 0, 1.0, {0, 2}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::ResourceUnavailable, "raw", 0, 0, 1.0, {3, 3}}), Error);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::WorkstationDown, "", 9, 0, 1.0, {0, 2}}), Error);
  CHECK_THROWS_AS(sim.position("ghost"), Error);
  CHECK_THROWS_AS(sim.replan(0), Error);
  sim.run(3);
  CHECK_THROWS_AS(sim.inject({AnomalyKind::TaskDelay, "task_a", 0, 1, 1.0, {}}), Error);
  CHECK(sim.events().end() ==
        std::find_if(sim.events().begin(), sim.events().end(), [](const SimEvent& e) { return e.kind == "anomaly"; }));

  Schedule short_plan = plan;
  short_plan.horizon = 4;
  CHECK_THROWS_AS(Simulator(inst, short_plan), Error);
  CHECK_THROWS_AS(anomaly_from_json(nlohmann::json{{"kind", "Meteor"}}), Error);
  CHECK_THROWS_AS(anomaly_from_json(nlohmann::json{{"kind", "TaskDelay"}}), Error);
}

TEST_CASE("anomaly documents round-trip") {
  const std::vector<AnomalyEvent> events = {
      {AnomalyKind::TaskDelay, "task_a", 0, 2, 1.0, {}},
      {AnomalyKind::VehicleSlowdown, "cart", 0, 0, 0.5, {}},
      {AnomalyKind::ResourceUnavailable, "fixture", 0, 0, 1.0, {2, 5}},
      {AnomalyKind::WorkstationDown, "", 2, 0, 1.0, {1, 4}},
  };
  for (const auto& e : events) CHECK(anomaly_from_json(anomaly_to_json(e)) == e);
  CHECK(anomaly_to_json(events[0]) == nlohmann::json::parse(R"({"kind":"TaskDelay","task":"task_a","steps":2})"));
}

TEST_CASE("state and trace documents") {
  const auto inst = testing::shuttle_instance();
  Simulator sim(inst, optimal_plan(inst));
  sim.run(4);
  const auto state = sim.state_json();
  CHECK(state.at("clock") == 4);
  CHECK(state.at("finished") == false);
  CHECK(state.at("positions").at("part").at("carrier") == "cart");
  CHECK(state.at("positions").at("fixture").at("node") == 2);
  CHECK(state.at("deviations").empty());
  CHECK(state.at("tasks").at(0).at("phase") == "done");
  CHECK(state.at("tasks").at(1).at("phase") == "pending");

  std::istringstream lines(sim.trace_ndjson());
  std::string line;
  int states = 0;
  int last_step = -1;
  bool saw_depart = false;
  while (std::getline(lines, line)) {
    const auto doc = nlohmann::json::parse(line);
    const int step = doc.at("step");
    CHECK(step >= last_step);
    last_step = step;
    if (doc.at("type") == "state") {
      CHECK(step == states);
      ++states;
    } else {
      saw_depart = saw_depart || doc.at("kind") == "depart";
    }
  }
  CHECK(states == 5);
  CHECK(saw_depart);
}
