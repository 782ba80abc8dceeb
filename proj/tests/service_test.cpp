#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "linea/instance_io.hpp"
#include "linea/service.hpp"
#include "oracles.hpp"

using namespace linea;
using nlohmann::json;

namespace {

ApiResponse call(Session& s, const std::string& method, const std::string& path, const json& body = nullptr) {
  return s.dispatch(method, path, body.is_null() ? std::string() : body.dump());
}

ApiResponse planned(Session& s) {
  const auto r = call(s, "POST", "/api/plan");
  REQUIRE(r.status == 202);
  s.wait_for_plan();
  return call(s, "GET", "/api/plan/status");
}

}  // namespace

TEST_CASE("endpoints before and after planning") {
  Session s(testing::shuttle_instance());
  CHECK(call(s, "GET", "/api/instance").body == instance_to_json(testing::shuttle_instance()));
  CHECK(call(s, "GET", "/api/schedule").status == 404);
  CHECK(call(s, "GET", "/api/sim/state").status == 404);
  CHECK(call(s, "POST", "/api/sim/step", json{{"steps", 1}}).status == 404);
  CHECK(call(s, "POST", "/api/replan", json::object()).status == 404);
  CHECK(call(s, "POST", "/api/plan/cancel").status == 409);
  CHECK(call(s, "GET", "/api/plan/status").body.at("state") == "idle");

  const auto status = planned(s);
  CHECK(status.body.at("state") == "done");
  CHECK(status.body.at("status") == "Optimal");
  CHECK(status.body.at("job") == "plan-1");
  CHECK(status.body.at("progress").at("has_incumbent") == true);

  const auto schedule = call(s, "GET", "/api/schedule");
  REQUIRE(schedule.status == 200);
  CHECK(schedule.body.at("makespan") == 6);
  CHECK(call(s, "GET", "/api/schedule").body == schedule.body);
  const auto state = call(s, "GET", "/api/sim/state");
  CHECK(state.body.at("clock") == 0);
  CHECK(call(s, "GET", "/api/sim/state").body == state.body);
}

TEST_CASE("simulation through the API") {
  Session s(testing::shuttle_instance());
  planned(s);

  auto r = call(s, "POST", "/api/sim/step", json{{"steps", 3}});
  REQUIRE(r.status == 200);
  CHECK(r.body.at("clock") == 3);
  CHECK(r.body.at("state").at("clock") == 3);
  CHECK_FALSE(r.body.at("events").empty());
  CHECK(call(s, "POST", "/api/sim/step", json(1)).body.at("clock") == 4);

  const json delay = {{"kind", "WorkstationDown"}, {"workstation", 2}, {"from", 5}, {"to", 7}};
  r = call(s, "POST", "/api/sim/anomaly", delay);
  REQUIRE(r.status == 200);
  CHECK(r.body.at("anomalies").size() == 1);
  CHECK(call(s, "GET", "/api/sim/state").body.at("anomalies").at(0) == delay);

  r = call(s, "POST", "/api/replan", json{{"params", {{"time_limit", 30}}}});
  REQUIRE(r.status == 200);
  CHECK(r.body.at("applied") == true);
  CHECK(r.body.at("clock") == 4);
  CHECK(r.body.at("makespan") == 8);
  CHECK(r.body.at("previous_makespan") == 6);
  CHECK(call(s, "GET", "/api/schedule").body == r.body.at("schedule"));
  CHECK(s.dispatch("POST", "/api/sim/step", "").body.at("clock") == 5);

  r = call(s, "POST", "/api/sim/step", json{{"steps", 100}});
  CHECK(r.body.at("clock") == 9);
  CHECK(r.body.at("state").at("finished") == true);
  CHECK(r.body.at("state").at("deviations").empty());
  CHECK(call(s, "POST", "/api/sim/step", json{{"steps", 1}}).status == 409);
  CHECK(call(s, "POST", "/api/replan", json::object()).status == 409);
}

TEST_CASE("replanning an undisturbed run never worsens the plan") {
  Session s(testing::shuttle_instance());
  planned(s);
  call(s, "POST", "/api/sim/step", json{{"steps", 2}});
  const auto r = call(s, "POST", "/api/replan", json{{"window", 8}});
  REQUIRE(r.status == 200);
  CHECK(r.body.at("applied") == true);
  CHECK(r.body.at("window") == 8);
  CHECK(r.body.at("makespan").get<int>() <= r.body.at("previous_makespan").get<int>());
  // Continuing the current plan is feasible in the residual, so its value
  // (remaining makespan plus at most the tie-break weight) bounds the optimum.
  const double continuing = r.body.at("previous_makespan").get<int>() - 2 + 0.01;
  CHECK(r.body.at("objective").get<double>() <= continuing + 1e-9);
}

TEST_CASE("malformed requests are rejected with 422") {
  Session s(testing::shuttle_instance());
  CHECK(s.dispatch("POST", "/api/plan", "{not json").status == 422);
  CHECK(call(s, "POST", "/api/plan", json{{"gap", -1}}).status == 422);
  CHECK(call(s, "POST", "/api/plan", json{{"time_limit", 0}}).status == 422);
  CHECK(call(s, "POST", "/api/plan", json{{"threads", 4}}).status == 422);
  CHECK(call(s, "POST", "/api/plan", json::array()).status == 422);
  planned(s);
  CHECK(call(s, "POST", "/api/sim/step", json{{"steps", 0}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/step", json{{"steps", "two"}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/step", json{{"steps", 1.5}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/step", json{{"count", 1}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/anomaly", json{{"kind", "Meteor"}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/anomaly", json{{"kind", "TaskDelay"}, {"task", "task_a"}}).status == 422);
  CHECK(call(s, "POST", "/api/sim/anomaly", json{{"kind", "TaskDelay"}, {"task", "task_a"}, {"steps", 1}, {"x", 1}})
            .status == 422);
  CHECK(call(s, "POST", "/api/sim/anomaly", json{{"kind", "TaskDelay"}, {"task", "ghost"}, {"steps", 1}}).status ==
        422);
  CHECK(call(s, "POST", "/api/replan", json{{"window", 0}}).status == 422);
  CHECK(call(s, "POST", "/api/replan", json{{"params", {{"gap", "small"}}}}).status == 422);
  CHECK(call(s, "GET", "/api/sim/state").body.at("anomalies").empty());
  CHECK(call(s, "GET", "/api/nowhere").status == 404);
  CHECK(call(s, "DELETE", "/api/schedule").status == 405);
}

TEST_CASE("one solve at a time") {
  Session s(testing::two_task_line());
  REQUIRE(call(s, "POST", "/api/plan").status == 202);
  CHECK(call(s, "POST", "/api/plan").status == 409);
  CHECK(call(s, "GET", "/api/plan/status").body.at("state") == "running");
  const auto cancel = call(s, "POST", "/api/plan/cancel");
  CHECK(cancel.status == 202);
  s.wait_for_plan();
  const auto status = call(s, "GET", "/api/plan/status").body;
  CHECK(status.at("state") != "running");
  CHECK(status.at("job") == "plan-1");
}

TEST_CASE("concurrent steps are serialized") {
  Session s(testing::shuttle_instance());
  planned(s);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&] {
      for (int j = 0; j < 2; ++j) ok += call(s, "POST", "/api/sim/step", json{{"steps", 1}}).status == 200;
    });
  for (auto& t : threads) t.join();
  CHECK(ok == 8);
  CHECK(call(s, "GET", "/api/sim/state").body.at("clock") == 8);
}

TEST_CASE("the HTTP server answers on a socket") {
  Session s(testing::shuttle_instance());
  HttpServer server(s);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread runner([&] { server.run(); });

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  for (int i = 0; i < 50 && !client.Get("/api/plan/status"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));

  auto res = client.Get("/api/schedule");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = client.Post("/api/plan", "{}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 202);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(res->get_header_value("Content-Type") == "application/json");
  s.wait_for_plan();
  res = client.Get("/api/schedule");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("makespan") == 6);
  res = client.Post("/api/sim/step", R"({"steps": 2})", "application/json");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("clock") == 2);
  res = client.Post("/api/sim/step", "oops", "text/plain");
  REQUIRE(res);
  CHECK(res->status == 422);

  server.stop();
  runner.join();
}
