// Time-indexed MILP encoding of an assembly line instance.
//
// Column key layouts (see VarKey):
//   Start (t,k)  Assign/Exec (t,w,k)  Idle/Finished (t,k)  Occupancy (w,k)
//   Buffer (w,k,type)  Location (x,k,w1,w2)  Place (r,v,k)
//   Goto*/Depart* (v,k,edge)  Ride (r,v,k,edge,dir)  Consume/Produce (r,k,w)
//   Linearize (v,k,edge,slot) slot 0 = progress delta, 1/2 = fwd/bwd product
//   Deviation (w,k,type)
//
// Task state columns are closed forms of the assign binaries:
//   e(t,w,k) = sum_{k' in (k-d, k]} a(t,w,k'),   f(t,k) = sum_{k' <= k-d} s(t,k')
// Buffers follow a one-step recurrence: a start at k debits the level at k+1,
// and a finish at k (k = start + d) credits outputs and instruments at k+1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "linea/milp.hpp"

namespace linea {

namespace {

struct Dims {
  int horizon = 0;
  std::vector<std::string> types;
  std::vector<WorkstationId> ws;  // real workstation ids
  std::vector<int> vehicles;      // resource indices
  std::vector<int> units;         // non-vehicle resource indices
};

Dims dims_of(const ProblemInstance& inst) {
  Dims d;
  d.horizon = inst.horizon;
  d.types = inst.resource_types();
  for (const auto& w : inst.workstations) d.ws.push_back(w.id);
  for (std::size_t r = 0; r < inst.resources.size(); ++r)
    (inst.resources[r].is_vehicle() ? d.vehicles : d.units).push_back(static_cast<int>(r));
  return d;
}

int last_start(const TaskSpec& t, int horizon) { return std::min(t.latest_finish - t.duration, horizon - 1); }

bool uses_type_as_input(const TaskSpec& t, const std::string& type) { return t.inputs.count(type) > 0; }

int credited_quantity(const ProblemInstance& inst, const TaskSpec& t, const std::string& type) {
  int q = 0;
  if (auto it = t.outputs.find(type); it != t.outputs.end()) q += it->second;
  if (auto it = t.inputs.find(type); it != t.inputs.end())
    if (inst.type_category(type) == ResourceCategory::Instrument) q += it->second;
  return q;
}

bool eligible(const TaskSpec& t, WorkstationId w) {
  return std::find(t.eligible_workstations.begin(), t.eligible_workstations.end(), w) !=
         t.eligible_workstations.end();
}

// Steps k at which unit of `type` may leave workstation w into storage.
std::set<int> consume_steps(const ProblemInstance& inst, const std::string& type, WorkstationId w) {
  std::set<int> ks;
  for (const auto& t : inst.tasks) {
    if (!eligible(t, w) || !uses_type_as_input(t, type)) continue;
    for (int k = t.earliest_start; k <= last_start(t, inst.horizon); ++k) ks.insert(k);
  }
  return ks;
}

// Finish steps k (credited at k+1) at which a unit of `type` may enter w.
std::set<int> produce_steps(const ProblemInstance& inst, const std::string& type, WorkstationId w) {
  std::set<int> ks;
  for (const auto& t : inst.tasks) {
    if (!eligible(t, w) || credited_quantity(inst, t, type) == 0) continue;
    for (int k = t.earliest_start; k <= last_start(t, inst.horizon); ++k)
      if (k + t.duration <= inst.horizon - 2) ks.insert(k + t.duration);
  }
  return ks;
}

int departure_last(const ProblemInstance& inst, int vehicle) {
  return inst.horizon - 1 - travel_steps(inst, inst.resources[vehicle]);
}

int departure_first(const ProblemInstance& inst, int vehicle) {
  const auto& v = inst.resources[vehicle];
  return v.transit ? v.transit->arrival_step : 0;
}

bool blocked(const std::vector<StepWindow>& windows, int from, int to) {
  for (const auto& w : windows)
    if (from < w.to && w.from < to) return true;
  return false;
}

std::string idx(int v) { return std::to_string(v); }

class Encoder {
 public:
  explicit Encoder(const ProblemInstance& inst) : inst_(inst), dims_(dims_of(inst)) {}

  Encoding run() {
    if (auto v = validate(inst_); !v.empty()) throw ValidationError(std::move(v));
    K_ = inst_.horizon;
    encode_tasks();
    encode_vehicles();
    encode_units();
    encode_buffers();
    encode_objective();
    add_hints();
    return std::move(out_);
  }

 private:
  int column(const VarKey& key, const std::string& name, ColumnKind kind, double lo, double hi) {
    int j = out_.model.add_column(name, kind, lo, hi);
    out_.catalog.bind(key, j);
    return j;
  }
  int col(const VarKey& key) const { return out_.catalog.find(key); }
  void row(const std::string& name, std::vector<RowEntry> entries, RowSense sense, double rhs) {
    out_.model.add_row(name, std::move(entries), sense, rhs);
  }

  void encode_tasks() {
    const int T = static_cast<int>(inst_.tasks.size());
    for (int t = 0; t < T; ++t) {
      const auto& task = inst_.tasks[t];
      const int s0 = task.earliest_start;
      const int s1 = last_start(task, K_);
      const int d = task.duration;
      const std::string tn = idx(t);

      for (auto w : task.eligible_workstations) {
        const auto* ws = inst_.find_workstation(w);
        for (int k = s0; k <= s1; ++k) {
          const bool down = blocked(ws->down, k, k + d);
          column({Family::Assign, t, w, k}, "a_" + tn + "_" + idx(w) + "_" + idx(k), ColumnKind::Binary, 0.0,
                 down ? 0.0 : 1.0);
        }
      }
      for (int k = s0; k <= s1; ++k) {
        int s = column({Family::Start, t, k}, "s_" + tn + "_" + idx(k), ColumnKind::Continuous, 0.0, 1.0);
        std::vector<RowEntry> link{{s, 1.0}};
        for (auto w : task.eligible_workstations) link.push_back({col({Family::Assign, t, w, k}), -1.0});
        row("start_link_" + tn + "_" + idx(k), std::move(link), RowSense::Equal, 0.0);
      }

      const int e_last = std::min(task.latest_finish, K_) - 1;
      for (auto w : task.eligible_workstations) {
        for (int k = s0; k <= e_last; ++k) {
          int e = column({Family::Exec, t, w, k}, "e_" + tn + "_" + idx(w) + "_" + idx(k), ColumnKind::Continuous, 0.0,
                         1.0);
          std::vector<RowEntry> def{{e, 1.0}};
          for (int kk = std::max(s0, k - d + 1); kk <= std::min(k, s1); ++kk)
            def.push_back({col({Family::Assign, t, w, kk}), -1.0});
          row("exec_def_" + tn + "_" + idx(w) + "_" + idx(k), std::move(def), RowSense::Equal, 0.0);
        }
      }

      for (int k = 0; k < K_; ++k) {
        int f = column({Family::Finished, t, k}, "f_" + tn + "_" + idx(k), ColumnKind::Continuous, 0.0, 1.0);
        std::vector<RowEntry> def{{f, 1.0}};
        for (int kk = s0; kk <= std::min(k - d, s1); ++kk) def.push_back({col({Family::Start, t, kk}), -1.0});
        row("finished_def_" + tn + "_" + idx(k), std::move(def), RowSense::Equal, 0.0);
      }
      for (int k = 0; k < K_; ++k) {
        int i = column({Family::Idle, t, k}, "i_" + tn + "_" + idx(k), ColumnKind::Continuous, 0.0, 1.0);
        std::vector<RowEntry> one{{i, 1.0}, {col({Family::Finished, t, k}), 1.0}};
        std::vector<RowEntry> unique_ws;
        for (auto w : task.eligible_workstations)
          if (int e = col({Family::Exec, t, w, k}); e >= 0) {
            one.push_back({e, 1.0});
            unique_ws.push_back({e, 1.0});
          }
        row("one_state_" + tn + "_" + idx(k), std::move(one), RowSense::Equal, 1.0);
        if (!unique_ws.empty()) row("unique_ws_" + tn + "_" + idx(k), std::move(unique_ws), RowSense::LessEqual, 1.0);
      }

      std::vector<RowEntry> starts, assigns;
      for (int k = s0; k <= s1; ++k) {
        starts.push_back({col({Family::Start, t, k}), 1.0});
        for (auto w : task.eligible_workstations) assigns.push_back({col({Family::Assign, t, w, k}), 1.0});
      }
      row("unique_start_" + tn, std::move(starts), RowSense::Equal, 1.0);
      row("unique_assign_" + tn, std::move(assigns), RowSense::Equal, 1.0);
    }

    for (std::size_t n = 0; n < inst_.dependencies.size(); ++n) {
      const auto& dep = inst_.dependencies[n];
      const int p = inst_.task_index(dep.predecessor);
      const int s = inst_.task_index(dep.successor);
      const int dp = inst_.tasks[p].duration;
      const int ds = inst_.tasks[s].duration;
      std::vector<RowEntry> entries = start_time_terms(p, 1.0);
      auto rhs_terms = start_time_terms(s, -1.0);
      entries.insert(entries.end(), rhs_terms.begin(), rhs_terms.end());
      double rhs = 0.0;
      switch (dep.kind) {
        case DependencyKind::FinishToStart: rhs = -dp; break;
        case DependencyKind::StartToStart: rhs = 0.0; break;
        case DependencyKind::FinishToFinish: rhs = ds - dp; break;
        case DependencyKind::StartToFinish: rhs = ds; break;
      }
      row("precedence_" + idx(static_cast<int>(n)), std::move(entries), RowSense::LessEqual, rhs);
    }

    for (auto w : dims_.ws) {
      const auto* ws = inst_.find_workstation(w);
      for (int k = 0; k < K_; ++k) {
        int o = column({Family::Occupancy, w, k}, "o_" + idx(w) + "_" + idx(k), ColumnKind::Continuous,
                       ws->occupancy_min, ws->occupancy_max);
        std::vector<RowEntry> def{{o, 1.0}};
        for (int t = 0; t < T; ++t)
          if (int e = col({Family::Exec, t, w, k}); e >= 0) def.push_back({e, -inst_.tasks[t].capacity_weight});
        row("occupancy_" + idx(w) + "_" + idx(k), std::move(def), RowSense::Equal, 0.0);
      }
    }

    if (T > 0) {
      int tau = column({Family::Makespan}, "tau", ColumnKind::Continuous, 0.0, static_cast<double>(K_));
      for (int t = 0; t < T; ++t) {
        std::vector<RowEntry> entries{{tau, 1.0}};
        auto terms = start_time_terms(t, -1.0);
        entries.insert(entries.end(), terms.begin(), terms.end());
        row("makespan_" + idx(t), std::move(entries), RowSense::GreaterEqual, inst_.tasks[t].duration);
      }
    }
  }

  std::vector<RowEntry> start_time_terms(int t, double sign) const {
    std::vector<RowEntry> out;
    const auto& task = inst_.tasks[t];
    for (int k = task.earliest_start; k <= last_start(task, K_); ++k)
      out.push_back({col({Family::Start, t, k}), sign * k});
    return out;
  }

  // Constant part of a unit's movement state contributed by an initial transit.
  struct TransitTerms {
    bool moving = false;  // mid-edge at step k
    double progress = 0.0;
    bool arrives = false;  // reaches `node` at k
  };

  TransitTerms transit_terms(const ResourceSpec& r, int n, int k, int edge) const {
    TransitTerms out;
    if (!r.transit) return out;
    const auto& tr = *r.transit;
    const Edge& e = inst_.edges[edge];
    const bool on_edge = std::min(tr.from, tr.to) == e.from && std::max(tr.from, tr.to) == e.to;
    if (!on_edge) return out;
    if (k < tr.arrival_step) {
      out.moving = true;
      const double done = 1.0 - static_cast<double>(tr.arrival_step - k) / n;
      out.progress = tr.from < tr.to ? std::max(done, 0.0) : std::min(1.0 - done, 1.0);
    }
    return out;
  }

  void encode_vehicles() {
    for (int v : dims_.vehicles) {
      const auto& veh = inst_.resources[v];
      const int n = travel_steps(inst_, veh);
      const double delta = 1.0 / n;
      const int k0 = departure_first(inst_, v);
      const int k1 = departure_last(inst_, v);
      const std::string vn = idx(v);
      const int E = static_cast<int>(inst_.edges.size());

      for (auto w : dims_.ws)
        for (int k = 0; k < K_; ++k) {
          double fixed = (!veh.transit && veh.initial_location == w) ? 1.0 : 0.0;
          column({Family::Location, v, k, w, w}, "l_" + vn + "_" + idx(k) + "_" + idx(w) + "_" + idx(w),
                 ColumnKind::Continuous, k == 0 ? fixed : 0.0, k == 0 ? fixed : 1.0);
        }
      for (int e = 0; e < E; ++e)
        for (int k = std::max(k0, 0); k <= k1; ++k) {
          column({Family::DepartFwd, v, k, e}, "df_" + vn + "_" + idx(k) + "_" + idx(e), ColumnKind::Binary, 0, 1);
          column({Family::DepartBwd, v, k, e}, "db_" + vn + "_" + idx(k) + "_" + idx(e), ColumnKind::Binary, 0, 1);
        }

      // Flow conservation of node indicators.
      for (int k = 0; k + 1 < K_; ++k)
        for (auto w : dims_.ws) {
          std::vector<RowEntry> flow{{col({Family::Location, v, k + 1, w, w}), 1.0},
                                     {col({Family::Location, v, k, w, w}), -1.0}};
          for (const auto& [dcol, sign] : departures_at(v, k, w, k + 1, n)) flow.push_back({dcol, sign});
          double rhs = (veh.transit && veh.transit->to == w && veh.transit->arrival_step == k + 1) ? 1.0 : 0.0;
          row("veh_flow_" + vn + "_" + idx(k) + "_" + idx(w), std::move(flow), RowSense::Equal, rhs);
        }
      // A vehicle leaves a node only from where it is.
      for (int k = 0; k < K_; ++k)
        for (auto w : dims_.ws) {
          std::vector<RowEntry> cap{{col({Family::Location, v, k, w, w}), -1.0}};
          for (int e = 0; e < E; ++e) {
            if (inst_.edges[e].from == w)
              if (int c = col({Family::DepartFwd, v, k, e}); c >= 0) cap.push_back({c, 1.0});
            if (inst_.edges[e].to == w)
              if (int c = col({Family::DepartBwd, v, k, e}); c >= 0) cap.push_back({c, 1.0});
          }
          if (cap.size() > 1) row("veh_depart_" + vn + "_" + idx(k) + "_" + idx(w), std::move(cap), RowSense::LessEqual, 0.0);
        }
      // Exactly one of: at some node, on some edge.
      for (int k = 0; k < K_; ++k) {
        std::vector<RowEntry> part;
        for (auto w : dims_.ws) part.push_back({col({Family::Location, v, k, w, w}), 1.0});
        double mid = 0.0;
        for (int e = 0; e < E; ++e) {
          for (int j = 1; j < n; ++j) {
            if (int c = col({Family::DepartFwd, v, k - j, e}); c >= 0) part.push_back({c, 1.0});
            if (int c = col({Family::DepartBwd, v, k - j, e}); c >= 0) part.push_back({c, 1.0});
          }
          if (transit_terms(veh, n, k, e).moving) mid = 1.0;
        }
        row("veh_partition_" + vn + "_" + idx(k), std::move(part), RowSense::Equal, 1.0 - mid);
      }
      // Edge progress and goto indicators.
      for (int e = 0; e < E; ++e) {
        const Edge& edge = inst_.edges[e];
        for (int k = 0; k < K_; ++k) {
          int l = column({Family::Location, v, k, edge.from, edge.to},
                         "l_" + vn + "_" + idx(k) + "_" + idx(edge.from) + "_" + idx(edge.to), ColumnKind::Continuous,
                         0.0, 1.0);
          std::vector<RowEntry> def{{l, 1.0}, {col({Family::Location, v, k, edge.to, edge.to}), -1.0}};
          for (int j = 1; j < n; ++j) {
            if (int c = col({Family::DepartFwd, v, k - j, e}); c >= 0) def.push_back({c, -j * delta});
            if (int c = col({Family::DepartBwd, v, k - j, e}); c >= 0) def.push_back({c, -(1.0 - j * delta)});
          }
          row("veh_progress_" + vn + "_" + idx(k) + "_" + idx(e), std::move(def), RowSense::Equal,
              transit_terms(veh, n, k, e).progress);
        }
        for (int k = 0; k + 1 < K_; ++k) {
          const bool tr_moving = transit_terms(veh, n, k, e).moving;
          const bool tr_fwd = veh.transit && veh.transit->from < veh.transit->to;
          for (int dir : {kForward, kBackward}) {
            const Family gf = dir == kForward ? Family::GotoFwd : Family::GotoBwd;
            const Family df = dir == kForward ? Family::DepartFwd : Family::DepartBwd;
            int g = column({gf, v, k, e}, std::string(dir == kForward ? "gf_" : "gb_") + vn + "_" + idx(k) + "_" + idx(e),
                           ColumnKind::Binary, 0.0, 1.0);
            std::vector<RowEntry> def{{g, 1.0}};
            for (int j = 0; j < n; ++j)
              if (int c = col({df, v, k - j, e}); c >= 0) def.push_back({c, -1.0});
            double rhs = (tr_moving && (dir == kForward) == tr_fwd) ? 1.0 : 0.0;
            row(std::string(dir == kForward ? "goto_fwd_" : "goto_bwd_") + vn + "_" + idx(k) + "_" + idx(e),
                std::move(def), RowSense::Equal, rhs);
          }
          const int gf = col({Family::GotoFwd, v, k, e});
          const int gb = col({Family::GotoBwd, v, k, e});
          row("goto_gate_" + vn + "_" + idx(k) + "_" + idx(e), {{gf, 1.0}, {gb, 1.0}}, RowSense::LessEqual, 1.0);
        }
        // Progress recurrence (g_fwd + g_bwd)(l[k+1] - l[k]) = T v (g_fwd - g_bwd), linearized.
        for (int k = 0; k + 1 < K_; ++k) {
          const std::string tag = vn + "_" + idx(k) + "_" + idx(e);
          int dl = column({Family::Linearize, v, k, e, 0}, "dl_" + tag, ColumnKind::Continuous, -1.0, 1.0);
          row("progress_delta_" + tag,
              {{dl, 1.0},
               {col({Family::Location, v, k + 1, edge.from, edge.to}), -1.0},
               {col({Family::Location, v, k, edge.from, edge.to}), 1.0}},
              RowSense::Equal, 0.0);
          const int gf = col({Family::GotoFwd, v, k, e});
          const int gb = col({Family::GotoBwd, v, k, e});
          const int zf_expected = out_.model.num_columns();
          out_.catalog.bind({Family::Linearize, v, k, e, 1}, zf_expected);
          auto zf = linearize_product(out_.model, gf, dl, "zf_" + tag);
          out_.catalog.bind({Family::Linearize, v, k, e, 2}, out_.model.num_columns());
          auto zb = linearize_product(out_.model, gb, dl, "zb_" + tag);
          row("progress_" + tag, {{zf.column, 1.0}, {zb.column, 1.0}, {gf, -delta}, {gb, delta}}, RowSense::Equal, 0.0);
        }
      }
    }
  }

  // Departure columns leaving w at `k_out` (sign +1) and arriving at w at
  // `k_in` (sign -1) for vehicle v.
  std::vector<std::pair<int, double>> departures_at(int v, int k_out, WorkstationId w, int k_in, int n) const {
    std::vector<std::pair<int, double>> out;
    for (int e = 0; e < static_cast<int>(inst_.edges.size()); ++e) {
      const Edge& edge = inst_.edges[e];
      if (edge.from == w) {
        if (int c = col({Family::DepartFwd, v, k_out, e}); c >= 0) out.push_back({c, 1.0});
        if (int c = col({Family::DepartBwd, v, k_in - n, e}); c >= 0) out.push_back({c, -1.0});
      }
      if (edge.to == w) {
        if (int c = col({Family::DepartBwd, v, k_out, e}); c >= 0) out.push_back({c, 1.0});
        if (int c = col({Family::DepartFwd, v, k_in - n, e}); c >= 0) out.push_back({c, -1.0});
      }
    }
    return out;
  }

  void encode_units() {
    const int E = static_cast<int>(inst_.edges.size());
    std::vector<WorkstationId> nodes = dims_.ws;
    nodes.push_back(kStorageNode);

    for (int r : dims_.units) {
      const auto& unit = inst_.resources[r];
      const std::string rn = idx(r);
      const bool moves = is_transportable(inst_, r);

      for (auto w : nodes)
        for (int k = 0; k < K_; ++k) {
          double fixed = (!unit.transit && unit.initial_location == w) ? 1.0 : 0.0;
          column({Family::Location, r, k, w, w}, "l_" + rn + "_" + idx(k) + "_" + idx(w) + "_" + idx(w),
                 ColumnKind::Continuous, k == 0 ? fixed : 0.0, k == 0 ? fixed : 1.0);
        }

      for (auto w : dims_.ws) {
        for (int k : consume_steps(inst_, unit.resource_type, w)) {
          const bool off = blocked(unit.unavailable, k, k + 1);
          column({Family::Consume, r, k, w}, "xc_" + rn + "_" + idx(k) + "_" + idx(w), ColumnKind::Binary, 0.0,
                 off ? 0.0 : 1.0);
        }
        for (int k : produce_steps(inst_, unit.resource_type, w))
          column({Family::Produce, r, k, w}, "xp_" + rn + "_" + idx(k) + "_" + idx(w), ColumnKind::Binary, 0.0, 1.0);
      }

      if (moves) {
        for (int v : dims_.vehicles) {
          const int n = travel_steps(inst_, inst_.resources[v]);
          for (int e = 0; e < E; ++e)
            for (int k = 0; k < K_; ++k)
              for (int dir : {kForward, kBackward}) {
                int dcol = col({dir == kForward ? Family::DepartFwd : Family::DepartBwd, v, k, e});
                if (dcol < 0) continue;
                const bool off = blocked(unit.unavailable, k, k + n);
                int ride = column({Family::Ride, r, v, k, e, dir},
                                  "rd_" + rn + "_" + idx(v) + "_" + idx(k) + "_" + idx(e) + "_" + idx(dir),
                                  ColumnKind::Binary, 0.0, off ? 0.0 : 1.0);
                row("ride_gate_" + rn + "_" + idx(v) + "_" + idx(k) + "_" + idx(e) + "_" + idx(dir),
                    {{ride, 1.0}, {dcol, -1.0}}, RowSense::LessEqual, 0.0);
              }
          for (int k = 0; k + 1 < K_; ++k) {
            int p = column({Family::Place, r, v, k}, "p_" + rn + "_" + idx(v) + "_" + idx(k), ColumnKind::Continuous,
                           0.0, 1.0);
            std::vector<RowEntry> def{{p, 1.0}};
            double rhs = 0.0;
            for (int e = 0; e < E; ++e) {
              for (int j = 0; j < n; ++j)
                for (int dir : {kForward, kBackward})
                  if (int c = col({Family::Ride, r, v, k - j, e, dir}); c >= 0) def.push_back({c, -1.0});
              if (unit.transit && unit.transit->carrier == inst_.resources[v].id && transit_terms(unit, n, k, e).moving)
                rhs = 1.0;
            }
            row("place_" + rn + "_" + idx(v) + "_" + idx(k), std::move(def), RowSense::Equal, rhs);
          }
        }
        for (int e = 0; e < E; ++e) {
          const Edge& edge = inst_.edges[e];
          for (int k = 0; k < K_; ++k) {
            int l = column({Family::Location, r, k, edge.from, edge.to},
                           "l_" + rn + "_" + idx(k) + "_" + idx(edge.from) + "_" + idx(edge.to), ColumnKind::Continuous,
                           0.0, 1.0);
            std::vector<RowEntry> def{{l, 1.0}, {col({Family::Location, r, k, edge.to, edge.to}), -1.0}};
            double rhs = 0.0;
            for (int v : dims_.vehicles) {
              const int n = travel_steps(inst_, inst_.resources[v]);
              for (int j = 1; j < n; ++j) {
                if (int c = col({Family::Ride, r, v, k - j, e, kForward}); c >= 0) def.push_back({c, -static_cast<double>(j) / n});
                if (int c = col({Family::Ride, r, v, k - j, e, kBackward}); c >= 0)
                  def.push_back({c, -(1.0 - static_cast<double>(j) / n)});
              }
              if (unit.transit && unit.transit->carrier == inst_.resources[v].id)
                rhs = transit_terms(unit, n, k, e).progress;
            }
            row("unit_progress_" + rn + "_" + idx(k) + "_" + idx(e), std::move(def), RowSense::Equal, rhs);
          }
        }
      }

      for (int k = 0; k + 1 < K_; ++k) {
        for (auto w : dims_.ws) {
          std::vector<RowEntry> flow{{col({Family::Location, r, k + 1, w, w}), 1.0},
                                     {col({Family::Location, r, k, w, w}), -1.0}};
          for (const auto& [c, sign] : rides_at(r, k, w, k + 1)) flow.push_back({c, sign});
          if (int c = col({Family::Consume, r, k, w}); c >= 0) flow.push_back({c, 1.0});
          if (int c = col({Family::Produce, r, k, w}); c >= 0) flow.push_back({c, -1.0});
          double rhs = (unit.transit && unit.transit->to == w && unit.transit->arrival_step == k + 1) ? 1.0 : 0.0;
          row("unit_flow_" + rn + "_" + idx(k) + "_" + idx(w), std::move(flow), RowSense::Equal, rhs);
        }
        std::vector<RowEntry> store{{col({Family::Location, r, k + 1, kStorageNode, kStorageNode}), 1.0},
                                    {col({Family::Location, r, k, kStorageNode, kStorageNode}), -1.0}};
        std::vector<RowEntry> from_store{{col({Family::Location, r, k, kStorageNode, kStorageNode}), -1.0}};
        for (auto w : dims_.ws) {
          if (int c = col({Family::Consume, r, k, w}); c >= 0) store.push_back({c, -1.0});
          if (int c = col({Family::Produce, r, k, w}); c >= 0) {
            store.push_back({c, 1.0});
            from_store.push_back({c, 1.0});
          }
        }
        row("unit_storage_" + rn + "_" + idx(k), std::move(store), RowSense::Equal, 0.0);
        if (from_store.size() > 1)
          row("unit_create_" + rn + "_" + idx(k), std::move(from_store), RowSense::LessEqual, 0.0);
      }
      // A unit leaves a buffer (by vehicle or by consumption) only from where it is.
      for (int k = 0; k < K_; ++k)
        for (auto w : dims_.ws) {
          std::vector<RowEntry> cap{{col({Family::Location, r, k, w, w}), -1.0}};
          for (const auto& [c, sign] : rides_at(r, k, w, -1))
            if (sign > 0) cap.push_back({c, 1.0});
          if (int c = col({Family::Consume, r, k, w}); c >= 0) cap.push_back({c, 1.0});
          if (cap.size() > 1) row("unit_leave_" + rn + "_" + idx(k) + "_" + idx(w), std::move(cap), RowSense::LessEqual, 0.0);
        }
    }

    // Vehicle capacity.
    for (int v : dims_.vehicles) {
      const int cap = inst_.resources[v].carry_capacity.value_or(1);
      for (int e = 0; e < E; ++e)
        for (int k = 0; k < K_; ++k)
          for (int dir : {kForward, kBackward}) {
            int dcol = col({dir == kForward ? Family::DepartFwd : Family::DepartBwd, v, k, e});
            if (dcol < 0) continue;
            std::vector<RowEntry> entries{{dcol, -static_cast<double>(cap)}};
            for (int r : dims_.units)
              if (int c = col({Family::Ride, r, v, k, e, dir}); c >= 0) entries.push_back({c, 1.0});
            if (static_cast<int>(entries.size()) - 1 > cap)
              row("carry_cap_" + idx(v) + "_" + idx(k) + "_" + idx(e) + "_" + idx(dir), std::move(entries),
                  RowSense::LessEqual, 0.0);
          }
    }
  }

  // Ride columns of unit r leaving w at k_out (+1) and arriving at w at k_in (-1).
  std::vector<std::pair<int, double>> rides_at(int r, int k_out, WorkstationId w, int k_in) const {
    std::vector<std::pair<int, double>> out;
    for (int v : dims_.vehicles) {
      const int n = travel_steps(inst_, inst_.resources[v]);
      for (int e = 0; e < static_cast<int>(inst_.edges.size()); ++e) {
        const Edge& edge = inst_.edges[e];
        if (edge.from == w) {
          if (int c = col({Family::Ride, r, v, k_out, e, kForward}); c >= 0) out.push_back({c, 1.0});
          if (k_in >= 0)
            if (int c = col({Family::Ride, r, v, k_in - n, e, kBackward}); c >= 0) out.push_back({c, -1.0});
        }
        if (edge.to == w) {
          if (int c = col({Family::Ride, r, v, k_out, e, kBackward}); c >= 0) out.push_back({c, 1.0});
          if (k_in >= 0)
            if (int c = col({Family::Ride, r, v, k_in - n, e, kForward}); c >= 0) out.push_back({c, -1.0});
        }
      }
    }
    return out;
  }

  void encode_buffers() {
    const int T = static_cast<int>(inst_.tasks.size());
    for (auto w : dims_.ws) {
      const auto* ws = inst_.find_workstation(w);
      for (int ty = 0; ty < static_cast<int>(dims_.types.size()); ++ty) {
        const auto& type = dims_.types[ty];
        const double lo = ws->buffer_min.count(type) ? ws->buffer_min.at(type) : 0.0;
        const double hi = ws->buffer_max.count(type) ? ws->buffer_max.at(type) : inst_.units_of_type(type);
        for (int k = 0; k < K_; ++k) {
          int R = column({Family::Buffer, w, k, ty}, "R_" + idx(w) + "_" + idx(k) + "_" + idx(ty), ColumnKind::Continuous,
                         lo, hi);
          std::vector<RowEntry> def{{R, 1.0}};
          for (int r : dims_.units)
            if (inst_.resources[r].resource_type == type) def.push_back({col({Family::Location, r, k, w, w}), -1.0});
          row("buffer_" + idx(w) + "_" + idx(k) + "_" + idx(ty), std::move(def), RowSense::Equal, 0.0);

          // Units leaving into storage match the inputs of tasks starting here.
          std::vector<RowEntry> cons;
          for (int r : dims_.units)
            if (inst_.resources[r].resource_type == type)
              if (int c = col({Family::Consume, r, k, w}); c >= 0) cons.push_back({c, 1.0});
          for (int t = 0; t < T; ++t) {
            auto it = inst_.tasks[t].inputs.find(type);
            if (it == inst_.tasks[t].inputs.end()) continue;
            if (int a = col({Family::Assign, t, w, k}); a >= 0) cons.push_back({a, -static_cast<double>(it->second)});
          }
          if (!cons.empty()) row("consume_" + idx(w) + "_" + idx(k) + "_" + idx(ty), std::move(cons), RowSense::Equal, 0.0);

          // Units entering from storage match outputs and freed instruments.
          std::vector<RowEntry> prod;
          for (int r : dims_.units)
            if (inst_.resources[r].resource_type == type)
              if (int c = col({Family::Produce, r, k, w}); c >= 0) prod.push_back({c, 1.0});
          for (int t = 0; t < T; ++t) {
            const int q = credited_quantity(inst_, inst_.tasks[t], type);
            if (q == 0) continue;
            const int k_start = k - inst_.tasks[t].duration;
            if (int a = col({Family::Assign, t, w, k_start}); a >= 0) prod.push_back({a, -static_cast<double>(q)});
          }
          // Finishes credited beyond the horizon have no buffer row to land in.
          if (!prod.empty() && k + 1 < K_)
            row("produce_" + idx(w) + "_" + idx(k) + "_" + idx(ty), std::move(prod), RowSense::Equal, 0.0);
        }
      }
    }
  }

  void encode_objective() {
    const auto& obj = inst_.objective;
    if (int tau = col({Family::Makespan}); tau >= 0) out_.model.add_cost(tau, obj.makespan_weight);

    if (obj.inventory_weight > 0) {
      for (auto w : dims_.ws) {
        for (int ty = 0; ty < static_cast<int>(dims_.types.size()); ++ty) {
          const auto& type = dims_.types[ty];
          double ref = 0.0;
          for (const auto& r : obj.inventory_reference)
            if (r.workstation == w && r.resource_type == type) ref = r.level;
          for (int k = 0; k < K_; ++k) {
            const int R = col({Family::Buffer, w, k, ty});
            const auto& rc = out_.model.column(R);
            const double span = std::max(std::abs(rc.upper - ref), std::abs(rc.lower - ref));
            int dev = column({Family::Deviation, w, k, ty}, "dev_" + idx(w) + "_" + idx(k) + "_" + idx(ty),
                             ColumnKind::Continuous, 0.0, span);
            out_.model.add_cost(dev, obj.inventory_weight);
            row("dev_hi_" + idx(w) + "_" + idx(k) + "_" + idx(ty), {{dev, 1.0}, {R, -1.0}}, RowSense::GreaterEqual, -ref);
            row("dev_lo_" + idx(w) + "_" + idx(k) + "_" + idx(ty), {{dev, 1.0}, {R, 1.0}}, RowSense::GreaterEqual, ref);
          }
        }
      }
    }

    if (obj.tiebreak_weight > 0) {
      const int T = static_cast<int>(inst_.tasks.size());
      const double per_step = obj.tiebreak_weight / (static_cast<double>(T) * K_);
      for (int t = 0; t < T; ++t)
        for (int k = inst_.tasks[t].earliest_start; k < K_; ++k)
          if (int s = col({Family::Start, t, k}); s >= 0) out_.model.add_cost(s, per_step * k);
    }

    if (obj.cost_weight > 0 && !obj.linear_costs.empty()) {
      for (int j = 0; j < out_.catalog.size(); ++j) {
        auto it = obj.linear_costs.find(to_string(out_.catalog.key_of(j).family));
        if (it != obj.linear_costs.end()) out_.model.add_cost(j, obj.cost_weight * it->second);
      }
    }
  }

  void add_hints() {
    // Earliest finish along FinishToStart chains against each task's deadline.
    const int T = static_cast<int>(inst_.tasks.size());
    std::vector<int> earliest(T);
    for (int t = 0; t < T; ++t) earliest[t] = inst_.tasks[t].earliest_start;
    for (int pass = 0; pass < T; ++pass)
      for (const auto& d : inst_.dependencies) {
        if (d.kind != DependencyKind::FinishToStart) continue;
        int p = inst_.task_index(d.predecessor);
        int s = inst_.task_index(d.successor);
        earliest[s] = std::max(earliest[s], earliest[p] + inst_.tasks[p].duration);
      }
    for (int t = 0; t < T; ++t)
      if (earliest[t] + inst_.tasks[t].duration > inst_.tasks[t].latest_finish)
        out_.hints.push_back("task " + inst_.tasks[t].id + " cannot finish by step " +
                             std::to_string(inst_.tasks[t].latest_finish) + " along its dependency chain (earliest " +
                             std::to_string(earliest[t] + inst_.tasks[t].duration) + ")");
    for (const auto& type : dims_.types) {
      int needed = 0;
      for (const auto& t : inst_.tasks) {
        if (auto it = t.outputs.find(type); it != t.outputs.end()) needed = std::max(needed, it->second);
        if (auto it = t.inputs.find(type); it != t.inputs.end()) needed = std::max(needed, it->second);
      }
      if (needed > inst_.units_of_type(type))
        out_.hints.push_back("resource type " + type + " has fewer units than some task needs or produces");
    }
  }

  const ProblemInstance& inst_;
  Dims dims_;
  int K_ = 0;
  Encoding out_;
};

}  // namespace

bool is_transportable(const ProblemInstance& instance, int resource_index) {
  const auto& r = instance.resources.at(resource_index);
  if (r.is_vehicle()) return false;
  const bool has_vehicle = std::any_of(instance.resources.begin(), instance.resources.end(),
                                       [](const ResourceSpec& x) { return x.is_vehicle(); });
  if (!has_vehicle || instance.edges.empty()) return false;
  if (r.transit) return true;
  return std::any_of(instance.tasks.begin(), instance.tasks.end(),
                     [&](const TaskSpec& t) { return t.inputs.count(r.resource_type) > 0; });
}

Encoding encode(const ProblemInstance& instance) { return Encoder(instance).run(); }

std::map<Family, int> closed_form_counts(const ProblemInstance& inst) {
  std::map<Family, int> c;
  const Dims d = dims_of(inst);
  const int K = inst.horizon;
  const int W = static_cast<int>(d.ws.size());
  const int E = static_cast<int>(inst.edges.size());
  for (const auto& t : inst.tasks) {
    const int window = last_start(t, K) - t.earliest_start + 1;
    const int Wt = static_cast<int>(t.eligible_workstations.size());
    c[Family::Assign] += Wt * window;
    c[Family::Start] += window;
    c[Family::Exec] += Wt * (std::min(t.latest_finish, K) - t.earliest_start);
    c[Family::Finished] += K;
    c[Family::Idle] += K;
  }
  c[Family::Occupancy] = W * K;
  c[Family::Makespan] = inst.tasks.empty() ? 0 : 1;
  c[Family::Buffer] = W * static_cast<int>(d.types.size()) * K;
  if (inst.objective.inventory_weight > 0) c[Family::Deviation] = c[Family::Buffer];

  const int steps = std::max(K - 1, 0);
  int departure_slots_total = 0;
  for (int v : d.vehicles) {
    const int slots = std::max(departure_last(inst, v) - std::max(departure_first(inst, v), 0) + 1, 0);
    departure_slots_total += slots;
    c[Family::Location] += W * K + E * K;
    c[Family::DepartFwd] += E * slots;
    c[Family::DepartBwd] += E * slots;
    c[Family::GotoFwd] += E * steps;
    c[Family::GotoBwd] += E * steps;
    c[Family::Linearize] += 3 * E * steps;
  }
  for (int r : d.units) {
    const auto& unit = inst.resources[r];
    c[Family::Location] += (W + 1) * K;
    for (auto w : d.ws) {
      c[Family::Consume] += static_cast<int>(consume_steps(inst, unit.resource_type, w).size());
      c[Family::Produce] += static_cast<int>(produce_steps(inst, unit.resource_type, w).size());
    }
    if (is_transportable(inst, r)) {
      c[Family::Ride] += 2 * E * departure_slots_total;
      c[Family::Place] += static_cast<int>(d.vehicles.size()) * steps;
      c[Family::Location] += E * K;
    }
  }
  std::erase_if(c, [](const auto& kv) { return kv.second == 0; });
  return c;
}

}  // namespace linea
