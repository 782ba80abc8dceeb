#include "linea/instance_io.hpp"

#include <fstream>
#include <sstream>

namespace linea {

using nlohmann::json;

namespace {

std::vector<StepWindow> windows_from(const json& j) {
  std::vector<StepWindow> out;
  for (const auto& w : j) out.push_back({w.at(0).get<int>(), w.at(1).get<int>()});
  return out;
}

json windows_to(const std::vector<StepWindow>& ws) {
  json out = json::array();
  for (const auto& w : ws) out.push_back({w.from, w.to});
  return out;
}

template <typename T>
std::map<std::string, T> map_from(const json& j) {
  std::map<std::string, T> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<T>();
  return out;
}

}  // namespace

ProblemInstance instance_from_json(const json& doc) {
  try {
    ProblemInstance inst;
    inst.name = doc.value("name", "");
    inst.horizon = doc.at("horizon").get<int>();
    inst.sampling_time = doc.at("sampling_time").get<double>();

    for (const auto& t : doc.value("tasks", json::array())) {
      TaskSpec task;
      task.id = t.at("id").get<std::string>();
      task.duration = t.at("duration").get<int>();
      task.earliest_start = t.value("earliest_start", 0);
      task.latest_finish = t.value("latest_finish", inst.horizon);
      task.inputs = map_from<int>(t.value("inputs", json::object()));
      task.outputs = map_from<int>(t.value("outputs", json::object()));
      task.eligible_workstations = t.at("eligible_workstations").get<std::vector<WorkstationId>>();
      task.capacity_weight = t.value("capacity_weight", 1.0);
      inst.tasks.push_back(std::move(task));
    }

    for (const auto& d : doc.value("dependencies", json::array())) {
      inst.dependencies.push_back({d.at("predecessor").get<std::string>(), d.at("successor").get<std::string>(),
                                   parse_dependency_kind(d.value("kind", "FinishToStart"))});
    }

    for (const auto& r : doc.value("resources", json::array())) {
      ResourceSpec res;
      res.id = r.at("id").get<std::string>();
      res.category = parse_resource_category(r.at("category").get<std::string>());
      res.resource_type = r.value("resource_type", res.id);
      res.initial_location = r.value("initial_location", kStorageNode);
      if (r.contains("velocity")) res.velocity = r.at("velocity").get<double>();
      if (r.contains("carry_capacity")) res.carry_capacity = r.at("carry_capacity").get<int>();
      res.unavailable = windows_from(r.value("unavailable", json::array()));
      if (r.contains("transit")) {
        const auto& tr = r.at("transit");
        res.transit = Transit{tr.at("from").get<int>(), tr.at("to").get<int>(), tr.at("arrival_step").get<int>(),
                              tr.value("carrier", "")};
      }
      inst.resources.push_back(std::move(res));
    }

    for (const auto& w : doc.value("workstations", json::array())) {
      WorkstationSpec ws;
      ws.id = w.at("id").get<int>();
      ws.occupancy_min = w.value("occupancy_min", 0.0);
      ws.occupancy_max = w.value("occupancy_max", 1.0);
      ws.buffer_min = map_from<double>(w.value("buffer_min", json::object()));
      ws.buffer_max = map_from<double>(w.value("buffer_max", json::object()));
      ws.initial_buffer = map_from<double>(w.value("initial_buffer", json::object()));
      ws.is_storage = w.value("is_storage", false);
      ws.down = windows_from(w.value("down", json::array()));
      inst.workstations.push_back(std::move(ws));
    }

    for (const auto& e : doc.value("edges", json::array())) inst.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});

    if (doc.contains("objective")) {
      const auto& o = doc.at("objective");
      const auto weights = o.value("weights", json::object());
      inst.objective.makespan_weight = weights.value("makespan", 0.0);
      inst.objective.inventory_weight = weights.value("inventory", 0.0);
      inst.objective.cost_weight = weights.value("cost", 0.0);
      inst.objective.tiebreak_weight = o.value("tiebreak_weight", inst.objective.tiebreak_weight);
      for (const auto& ref : o.value("inventory_reference", json::array()))
        inst.objective.inventory_reference.push_back(
            {ref.at("workstation").get<int>(), ref.at("resource_type").get<std::string>(), ref.at("level").get<double>()});
      inst.objective.linear_costs = map_from<double>(o.value("linear_costs", json::object()));
    }
    return inst;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed instance document: ") + e.what());
  }
}

json instance_to_json(const ProblemInstance& inst) {
  json doc;
  doc["name"] = inst.name;
  doc["horizon"] = inst.horizon;
  doc["sampling_time"] = inst.sampling_time;
  doc["tasks"] = json::array();
  for (const auto& t : inst.tasks) {
    doc["tasks"].push_back({{"id", t.id},
                            {"duration", t.duration},
                            {"earliest_start", t.earliest_start},
                            {"latest_finish", t.latest_finish},
                            {"inputs", t.inputs},
                            {"outputs", t.outputs},
                            {"eligible_workstations", t.eligible_workstations},
                            {"capacity_weight", t.capacity_weight}});
  }
  doc["dependencies"] = json::array();
  for (const auto& d : inst.dependencies)
    doc["dependencies"].push_back({{"predecessor", d.predecessor}, {"successor", d.successor}, {"kind", to_string(d.kind)}});
  doc["resources"] = json::array();
  for (const auto& r : inst.resources) {
    json j = {{"id", r.id},
              {"resource_type", r.resource_type},
              {"category", to_string(r.category)},
              {"initial_location", r.initial_location}};
    if (r.velocity) j["velocity"] = *r.velocity;
    if (r.carry_capacity) j["carry_capacity"] = *r.carry_capacity;
    if (!r.unavailable.empty()) j["unavailable"] = windows_to(r.unavailable);
    if (r.transit)
      j["transit"] = {{"from", r.transit->from},
                      {"to", r.transit->to},
                      {"arrival_step", r.transit->arrival_step},
                      {"carrier", r.transit->carrier}};
    doc["resources"].push_back(std::move(j));
  }
  doc["workstations"] = json::array();
  for (const auto& w : inst.workstations) {
    json j = {{"id", w.id},
              {"occupancy_min", w.occupancy_min},
              {"occupancy_max", w.occupancy_max},
              {"buffer_min", w.buffer_min},
              {"buffer_max", w.buffer_max},
              {"initial_buffer", w.initial_buffer},
              {"is_storage", w.is_storage}};
    if (!w.down.empty()) j["down"] = windows_to(w.down);
    doc["workstations"].push_back(std::move(j));
  }
  doc["edges"] = json::array();
  for (const auto& e : inst.edges) doc["edges"].push_back({e.from, e.to});
  json refs = json::array();
  for (const auto& r : inst.objective.inventory_reference)
    refs.push_back({{"workstation", r.workstation}, {"resource_type", r.resource_type}, {"level", r.level}});
  doc["objective"] = {{"weights",
                       {{"makespan", inst.objective.makespan_weight},
                        {"inventory", inst.objective.inventory_weight},
                        {"cost", inst.objective.cost_weight}}},
                      {"tiebreak_weight", inst.objective.tiebreak_weight},
                      {"inventory_reference", refs},
                      {"linear_costs", inst.objective.linear_costs}};
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

ProblemInstance load_instance(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(doc);
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  write_text_file(path, instance_to_json(instance).dump(2) + "\n");
}

}  // namespace linea
