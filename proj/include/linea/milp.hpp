#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "linea/model.hpp"

namespace linea {

enum class ColumnKind { Binary, Continuous };
enum class RowSense { LessEqual, Equal, GreaterEqual };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  double cost = 0.0;
};

struct RowEntry {
  int column = 0;
  double value = 0.0;
};

struct Row {
  std::string name;
  std::vector<RowEntry> entries;  // sorted by column, no zeros, no duplicates
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// Sparse mixed-binary linear program, always minimized.
class MILPModel {
 public:
  int add_column(std::string name, ColumnKind kind, double lower, double upper, double cost = 0.0);
  /// Duplicate column references are merged and zero coefficients dropped.
  int add_row(std::string name, std::vector<RowEntry> entries, RowSense sense, double rhs);
  void add_cost(int column, double cost) { columns_.at(column).cost += cost; }
  void set_bounds(int column, double lower, double upper);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Column& column(int j) const { return columns_.at(j); }
  const Row& row(int i) const { return rows_.at(i); }
  int num_columns() const { return static_cast<int>(columns_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  double objective(std::span<const double> x) const;
  double activity(int row, std::span<const double> x) const;
  /// Largest bound or row violation of `x`.
  double max_violation(std::span<const double> x) const;

 private:
  std::vector<Column> columns_;
  std::vector<Row> rows_;
};

/// True when kinds, bounds, costs, coefficients, senses and right-hand sides
/// agree exactly. Names are compared only when `compare_names` is set.
bool structurally_equal(const MILPModel& a, const MILPModel& b, bool compare_names = false);

struct ModelStats {
  int binary_columns = 0;
  int continuous_columns = 0;
  int rows = 0;
  int nonzeros = 0;
  bool operator==(const ModelStats&) const = default;
};

ModelStats model_stats(const MILPModel& model);

enum class Family {
  Start,       // s(t,k)
  Assign,      // a(t,w,k)
  Exec,        // e(t,w,k)
  Idle,        // i(t,k)
  Finished,    // f(t,k)
  Occupancy,   // o(w,k)
  Buffer,      // R(w,k,type)
  Location,    // l(x,k,(w1,w2)); node indicator when w1 == w2
  Place,       // p(r,v,k)
  GotoFwd,     // g->(v,k,edge)
  GotoBwd,     // g<-(v,k,edge)
  DepartFwd,   // vehicle leaves the edge tail at k
  DepartBwd,   // vehicle leaves the edge head at k
  Ride,        // unit r departs on vehicle v at k along edge/direction
  Consume,     // unit r leaves the buffer of w into storage at k
  Produce,     // unit r enters the buffer of w from storage (credited at k+1)
  Makespan,    // tau
  Linearize,   // z auxiliaries of binary x continuous products
  Deviation,   // inventory deviation |R - R_ref|
};

inline constexpr int kFamilyCount = 19;

std::string to_string(Family family);

/// Semantic key of a column. Unused slots are -1. Task, resource, edge and
/// type slots hold indices into the instance; workstation slots hold ids.
struct VarKey {
  Family family = Family::Start;
  int a = -1;
  int b = -1;
  int c = -1;
  int d = -1;
  int e = -1;

  auto operator<=>(const VarKey&) const = default;
};

class VarCatalog {
 public:
  void bind(const VarKey& key, int column);
  int find(const VarKey& key) const;  // -1 when absent
  int at(const VarKey& key) const;    // throws when absent
  const VarKey& key_of(int column) const { return keys_.at(column); }
  int size() const { return static_cast<int>(keys_.size()); }

  std::map<Family, int> family_counts() const;

 private:
  std::map<VarKey, int> index_;
  std::vector<VarKey> keys_;
};

/// Columns per family predicted from the instance dimensions alone.
std::map<Family, int> closed_form_counts(const ProblemInstance& instance);

struct Encoding {
  MILPModel model;
  VarCatalog catalog;
  std::vector<std::string> hints;
};

Encoding encode(const ProblemInstance& instance);

struct ProductLinearization {
  int column = -1;
  std::array<int, 4> rows{};
};

/// Adds z = b * x via the four envelope rows
/// z <= U b, z >= L b, z <= x - L (1 - b), z >= x - U (1 - b).
ProductLinearization linearize_product(MILPModel& model, int binary_column, int continuous_column,
                                       const std::string& name);

/// Direction indices used by Goto/Depart/Ride keys.
inline constexpr int kForward = 0;
inline constexpr int kBackward = 1;

/// Whether a non-vehicle unit gets transport columns: some task consumes or
/// borrows its type and the instance has a vehicle.
bool is_transportable(const ProblemInstance& instance, int resource_index);

}  // namespace linea
