#include "linea/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "linea/exchange.hpp"
#include "linea/instance_io.hpp"
#include "linea/service.hpp"

namespace linea {

using nlohmann::json;

namespace {

struct Options {
  std::string instance;
  std::string schedule;
  std::string anomalies;
  std::string out;
  std::string trace;
  std::string format = "mps";
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_binaries = 20;
  double gap = 1e-6;
  double time_limit = 300.0;
  long node_limit = 1000000;
  bool replay = false;
  bool auto_replan = false;
};

SolveParams solve_params(const Options& o) {
  SolveParams p;
  p.gap = o.gap;
  p.time_limit = o.time_limit;
  p.node_limit = o.node_limit;
  return p;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text_file(path, text);
}

struct Scheduled {
  std::int64_t step;
  AnomalyEvent event;
};

// Anomaly files hold a JSON array of {"step": k, "anomaly": {...}}.
std::vector<Scheduled> load_anomalies(const std::string& path) {
  const json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw Error("'" + path + "' must hold a JSON array");
  std::vector<Scheduled> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("step") || !item.at("step").is_number_integer() ||
        !item.contains("anomaly") || item.size() != 2)
      throw Error("'" + path + "': every entry needs an integer step and an anomaly");
    out.push_back({item.at("step").get<std::int64_t>(), anomaly_from_json(item.at("anomaly"))});
  }
  std::stable_sort(out.begin(), out.end(), [](const Scheduled& a, const Scheduled& b) { return a.step < b.step; });
  return out;
}

int cmd_plan(const Options& o, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(o.instance);
  const auto enc = encode(inst);
  const auto sol = solve_milp(enc.model, solve_params(o));
  if (sol.status == MILPStatus::Infeasible) {
    err << "infeasible: no schedule fits the horizon\n";
    for (const auto& h : enc.hints) err << "hint: " << h << "\n";
    if (enc.hints.empty()) err << "hint: try a longer horizon or wider task windows\n";
    return kExitInfeasible;
  }
  if (!sol.has_solution()) {
    err << "no schedule found before the limit (" << sol.nodes << " nodes, " << sol.seconds << " s)\n";
    return kExitNoSolution;
  }
  const auto plan = decode_schedule(sol, enc, inst);
  write_or_print(o.out, write_schedule_json(plan), out);
  out << "status " << to_string(sol.status) << " makespan " << plan.makespan << " objective " << sol.objective
      << " bound " << sol.bound << " nodes " << sol.nodes << "\n";
  if (sol.status != MILPStatus::Optimal) err << "warning: stopped by a limit; the schedule may not be optimal\n";
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  const auto inst = load_instance(o.instance);
  const auto enc = encode(inst);
  const std::string name = inst.name.empty() ? "LINEA" : inst.name;
  write_or_print(o.out, o.format == "mps" ? write_mps(enc.model, name) : write_lp(enc.model, name), out);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(o.instance);
  const auto plan = read_schedule_json(read_text_file(o.schedule));
  SimOptions opts;
  opts.solve = solve_params(o);
  opts.auto_replan = o.auto_replan;
  Simulator sim(inst, plan, opts);
  const auto anomalies = o.anomalies.empty() ? std::vector<Scheduled>{} : load_anomalies(o.anomalies);
  for (const auto& a : anomalies)
    if (a.step < 0 || a.step >= inst.horizon - 1)
      throw Error("anomaly at step " + std::to_string(a.step) + " is outside the simulated steps");
  std::size_t next = 0;
  while (true) {
    for (; next < anomalies.size() && anomalies[next].step == sim.clock(); ++next) sim.inject(anomalies[next].event);
    if (sim.finished()) break;
    sim.step();
  }
  const std::string trace = sim.trace_ndjson();
  if (!o.trace.empty()) write_text_file(o.trace, trace);
  if (o.replay) out << trace;
  if (!o.out.empty()) write_text_file(o.out, write_schedule_json(sim.trajectory()));
  const auto devs = sim.detect_deviation();
  const auto& ev = sim.events();
  const auto replans = std::count_if(ev.begin(), ev.end(), [](const SimEvent& e) { return e.kind == "replan"; });
  const auto blocked = std::count_if(ev.begin(), ev.end(), [](const SimEvent& e) { return e.kind == "blocked"; });
  const auto unfinished = std::count_if(sim.tasks().begin(), sim.tasks().end(),
                                        [](const TaskState& t) { return t.phase != TaskPhase::Done; });
  (o.replay ? err : out) << "clock " << sim.clock() << " makespan " << sim.trajectory().makespan << " unfinished "
                         << unfinished << " blocked " << blocked << " replans " << replans << " deviations "
                         << devs.size() << "\n";
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(o.instance);
  const auto enc = encode(inst);
  const int binaries = model_stats(enc.model).binary_columns;
  if (binaries > o.max_binaries) {
    err << "refusing: the encoding has " << binaries << " binary columns, more than the limit of " << o.max_binaries
        << "\n";
    return kExitInfeasible;
  }
  const auto sol = brute_force(enc.model, o.max_binaries);
  if (!sol.has_solution()) {
    err << "infeasible: no assignment of the " << binaries << " binaries is feasible\n";
    return kExitInfeasible;
  }
  const auto plan = decode_schedule(sol, enc, inst);
  if (!o.out.empty()) write_text_file(o.out, write_schedule_json(plan));
  out << "status " << to_string(sol.status) << " makespan " << plan.makespan << " objective " << sol.objective
      << " binaries " << binaries << "\n";
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  const auto inst = load_instance(o.instance);
  const auto plan = read_schedule_json(read_text_file(o.schedule));
  const auto violations = check_schedule(inst, plan);
  for (const auto& v : violations) out << v.rule << ": " << v.message << "\n";
  out << (violations.empty() ? "ok" : std::to_string(violations.size()) + " violations") << "\n";
  return violations.empty() ? kExitOk : kExitFailure;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  int port = o.port;
  if (const char* env = std::getenv("LINEA_PORT"); env && *env) {
    try {
      std::size_t used = 0;
      port = std::stoi(env, &used);
      if (used != std::string(env).size() || port < 0 || port > 65535) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      err << "LINEA_PORT must be a port number, got '" << env << "'\n";
      return kExitUsage;
    }
  }
  SimOptions opts;
  opts.solve = solve_params(o);
  Session session(load_instance(o.instance), opts);
  HttpServer server(session);
  const int bound = server.bind(o.host, port);
  if (bound < 0) {
    err << "cannot listen on " << o.host << ":" << port << "\n";
    return kExitFailure;
  }
  out << "listening on http://" << o.host << ":" << bound << "\n" << std::flush;
  server.run();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-indexed production scheduling: plan, export, simulate and serve.", "linea"};
  app.require_subcommand(1);
  Options o;

  auto instance_flag = [&](CLI::App* cmd) {
    cmd->add_option("--instance", o.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  };
  auto solver_flags = [&](CLI::App* cmd) {
    cmd->add_option("--gap", o.gap, "Relative optimality gap")->check(CLI::NonNegativeNumber);
    cmd->add_option("--time-limit", o.time_limit, "Solver time limit in seconds")->check(CLI::PositiveNumber);
    cmd->add_option("--node-limit", o.node_limit, "Branch-and-bound node limit")->check(CLI::PositiveNumber);
  };

  auto* plan = app.add_subcommand("plan", "Solve an instance and write the schedule");
  instance_flag(plan);
  solver_flags(plan);
  plan->add_option("--out", o.out, "Schedule JSON output file")->required();

  auto* exp = app.add_subcommand("export", "Write the encoded model as MPS or LP text");
  instance_flag(exp);
  exp->add_option("--format", o.format, "mps or lp")->check(CLI::IsMember({"mps", "lp"}));
  exp->add_option("--out", o.out, "Output file (default: standard output)");

  auto* sim = app.add_subcommand("simulate", "Execute a schedule with optional anomalies");
  instance_flag(sim);
  solver_flags(sim);
  sim->add_option("--schedule", o.schedule, "Schedule JSON file")->required()->check(CLI::ExistingFile);
  sim->add_option("--anomalies", o.anomalies, "JSON array of {step, anomaly}")->check(CLI::ExistingFile);
  sim->add_flag("--replay", o.replay, "Print the NDJSON trace to standard output");
  sim->add_flag("--auto-replan", o.auto_replan, "Replan whenever execution deviates from the plan");
  sim->add_option("--trace", o.trace, "Write the NDJSON trace to a file");
  sim->add_option("--out", o.out, "Write the executed trajectory as a schedule JSON file");

  auto* oracle = app.add_subcommand("oracle", "Solve a tiny instance by exhaustive enumeration");
  instance_flag(oracle);
  oracle->add_option("--max-binaries", o.max_binaries, "Refuse encodings with more binaries")
      ->check(CLI::Range(1, 30));
  oracle->add_option("--out", o.out, "Schedule JSON output file");

  auto* check = app.add_subcommand("check", "Verify a schedule against an instance");
  instance_flag(check);
  check->add_option("--schedule", o.schedule, "Schedule JSON file")->required()->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API for one instance");
  instance_flag(serve);
  solver_flags(serve);
  serve->add_option("--port", o.port, "TCP port (LINEA_PORT overrides)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", o.host, "Address to bind");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(o, out, err);
    if (*exp) return cmd_export(o, out);
    if (*sim) return cmd_simulate(o, out, err);
    if (*oracle) return cmd_oracle(o, out, err);
    if (*check) return cmd_check(o, out);
    if (*serve) return cmd_serve(o, out, err);
  } catch (const ValidationError& e) {
    err << "invalid instance:\n";
    for (const auto& v : e.violations()) err << "  " << to_string(v.kind) << " " << v.subject << ": " << v.message << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace linea
