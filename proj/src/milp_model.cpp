#include <algorithm>
#include <cmath>

#include "linea/milp.hpp"

namespace linea {

int MILPModel::add_column(std::string name, ColumnKind kind, double lower, double upper, double cost) {
  if (kind == ColumnKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  columns_.push_back({std::move(name), kind, lower, upper, cost});
  return static_cast<int>(columns_.size()) - 1;
}

int MILPModel::add_row(std::string name, std::vector<RowEntry> entries, RowSense sense, double rhs) {
  std::sort(entries.begin(), entries.end(), [](const RowEntry& x, const RowEntry& y) { return x.column < y.column; });
  std::vector<RowEntry> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.column < 0 || e.column >= num_columns()) throw Error("row '" + name + "' references a missing column");
    if (!merged.empty() && merged.back().column == e.column)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  std::erase_if(merged, [](const RowEntry& e) { return e.value == 0.0; });
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void MILPModel::set_bounds(int column, double lower, double upper) {
  auto& c = columns_.at(column);
  c.lower = lower;
  c.upper = upper;
}

double MILPModel::objective(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < columns_.size(); ++j) v += columns_[j].cost * x[j];
  return v;
}

double MILPModel::activity(int row, std::span<const double> x) const {
  double v = 0.0;
  for (const auto& e : rows_.at(row).entries) v += e.value * x[e.column];
  return v;
}

double MILPModel::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    worst = std::max(worst, columns_[j].lower - x[j]);
    worst = std::max(worst, x[j] - columns_[j].upper);
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double act = activity(i, x);
    const auto& r = rows_[i];
    if (r.sense != RowSense::GreaterEqual) worst = std::max(worst, act - r.rhs);
    if (r.sense != RowSense::LessEqual) worst = std::max(worst, r.rhs - act);
  }
  return worst;
}

bool structurally_equal(const MILPModel& a, const MILPModel& b, bool compare_names) {
  if (a.num_columns() != b.num_columns() || a.num_rows() != b.num_rows()) return false;
  for (int j = 0; j < a.num_columns(); ++j) {
    const auto& x = a.column(j);
    const auto& y = b.column(j);
    if (x.kind != y.kind || x.lower != y.lower || x.upper != y.upper || x.cost != y.cost) return false;
    if (compare_names && x.name != y.name) return false;
  }
  for (int i = 0; i < a.num_rows(); ++i) {
    const auto& x = a.row(i);
    const auto& y = b.row(i);
    if (x.sense != y.sense || x.rhs != y.rhs || x.entries.size() != y.entries.size()) return false;
    if (compare_names && x.name != y.name) return false;
    for (std::size_t k = 0; k < x.entries.size(); ++k)
      if (x.entries[k].column != y.entries[k].column || x.entries[k].value != y.entries[k].value) return false;
  }
  return true;
}

ModelStats model_stats(const MILPModel& model) {
  ModelStats s;
  for (const auto& c : model.columns()) (c.kind == ColumnKind::Binary ? s.binary_columns : s.continuous_columns)++;
  s.rows = model.num_rows();
  for (const auto& r : model.rows()) s.nonzeros += static_cast<int>(r.entries.size());
  return s;
}

std::string to_string(Family family) {
  switch (family) {
    case Family::Start: return "start";
    case Family::Assign: return "assign";
    case Family::Exec: return "exec";
    case Family::Idle: return "idle";
    case Family::Finished: return "finished";
    case Family::Occupancy: return "occupancy";
    case Family::Buffer: return "buffer";
    case Family::Location: return "location";
    case Family::Place: return "place";
    case Family::GotoFwd: return "goto_fwd";
    case Family::GotoBwd: return "goto_bwd";
    case Family::DepartFwd: return "depart_fwd";
    case Family::DepartBwd: return "depart_bwd";
    case Family::Ride: return "ride";
    case Family::Consume: return "consume";
    case Family::Produce: return "produce";
    case Family::Makespan: return "makespan";
    case Family::Linearize: return "linearize";
    case Family::Deviation: return "deviation";
  }
  return "unknown";
}

void VarCatalog::bind(const VarKey& key, int column) {
  if (column != size()) throw Error("catalog columns must be bound in creation order");
  if (!index_.emplace(key, column).second) throw Error("duplicate catalog key for family " + to_string(key.family));
  keys_.push_back(key);
}

int VarCatalog::find(const VarKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

int VarCatalog::at(const VarKey& key) const {
  int j = find(key);
  if (j < 0) throw Error("no column for key in family " + to_string(key.family));
  return j;
}

std::map<Family, int> VarCatalog::family_counts() const {
  std::map<Family, int> out;
  for (const auto& k : keys_) out[k.family]++;
  return out;
}

ProductLinearization linearize_product(MILPModel& model, int binary_column, int continuous_column,
                                       const std::string& name) {
  const auto& b = model.column(binary_column);
  const auto& x = model.column(continuous_column);
  if (b.kind != ColumnKind::Binary) throw Error("linearize_product: '" + b.name + "' is not binary");
  const double lo = x.lower;
  const double hi = x.upper;
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw Error("linearize_product: '" + x.name + "' needs finite bounds");

  ProductLinearization out;
  out.column = model.add_column(name, ColumnKind::Continuous, std::min(lo, 0.0), std::max(hi, 0.0));
  const int z = out.column;
  const int bc = binary_column;
  const int xc = continuous_column;
  out.rows[0] = model.add_row(name + "_ub", {{z, 1.0}, {bc, -hi}}, RowSense::LessEqual, 0.0);
  out.rows[1] = model.add_row(name + "_lb", {{z, 1.0}, {bc, -lo}}, RowSense::GreaterEqual, 0.0);
  out.rows[2] = model.add_row(name + "_xu", {{z, 1.0}, {xc, -1.0}, {bc, -lo}}, RowSense::LessEqual, -lo);
  out.rows[3] = model.add_row(name + "_xl", {{z, 1.0}, {xc, -1.0}, {bc, -hi}}, RowSense::GreaterEqual, -hi);
  return out;
}

}  // namespace linea
