#include "linea/exchange.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace linea {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "obj",      "rhs",    "bnd",    "rng",       "marker",   "inf",      "infinity", "free",     "minimize",
      "minimise", "min",    "maximize", "maximise", "max",     "subject",  "such",     "st",       "s.t.",
      "bounds",   "bound",  "binary", "binaries",  "bin",      "general",  "generals", "gen",      "end",
      "to",       "that",   "integer", "integers", "semi-continuous", "sos"};
  return words;
}

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 255) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.') return false;
  for (unsigned char c : s)
    if (!std::isalnum(c) && c != '_' && c != '.') return false;
  return !reserved_words().count(lower_case(s));
}

std::vector<std::string> export_names(std::size_t count, const std::string& prefix,
                                      const std::function<const std::string&(std::size_t)>& name_of) {
  std::vector<std::string> out(count);
  std::set<std::string> used;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& n = name_of(i);
    if (valid_name(n) && used.insert(n).second)
      out[i] = n;
    else
      pending.push_back(i);
  }
  for (std::size_t i : pending) {
    std::string n = prefix + std::to_string(i);
    while (!used.insert(n).second) n += "_";
    out[i] = n;
  }
  return out;
}

std::string number(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_number(const std::string& token, double& out) {
  const std::string l = lower_case(token);
  if (l == "inf" || l == "+inf" || l == "infinity" || l == "+infinity" || l == "1e30" || l == "1e+30") {
    out = kInf;
    return true;
  }
  if (l == "-inf" || l == "-infinity" || l == "-1e30" || l == "-1e+30") {
    out = -kInf;
    return true;
  }
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && first != last;
}

double require_number(const std::string& token, const std::string& where) {
  double v = 0.0;
  if (!parse_number(token, v)) throw Error(where + ": expected a number, found '" + token + "'");
  return v;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Column-wise copy of the constraint matrix, entries in row order.
std::vector<std::vector<std::pair<int, double>>> by_column(const MILPModel& model) {
  std::vector<std::vector<std::pair<int, double>>> cols(model.num_columns());
  for (int i = 0; i < model.num_rows(); ++i)
    for (const auto& e : model.row(i).entries) cols[e.column].push_back({i, e.value});
  return cols;
}

struct PendingColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
  bool upper_set = false;
  double cost = 0.0;
};

struct PendingRow {
  std::string name;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  std::vector<RowEntry> entries;
};

MILPModel assemble(std::vector<PendingColumn>& cols, std::vector<PendingRow>& rows) {
  MILPModel m;
  for (auto& c : cols) {
    if (c.kind == ColumnKind::Binary && !c.upper_set && c.upper == kInf) c.upper = 1.0;
    if (c.kind == ColumnKind::Binary && (c.lower < 0.0 || c.upper > 1.0))
      throw Error("integer column " + c.name + " is not binary (bounds " + number(c.lower) + ", " + number(c.upper) + ")");
    m.add_column(c.name, c.kind, c.lower, c.upper, c.cost);
  }
  for (auto& r : rows) m.add_row(r.name, std::move(r.entries), r.sense, r.rhs);
  return m;
}

}  // namespace

std::vector<std::string> exported_column_names(const MILPModel& model) {
  return export_names(model.num_columns(), "C",
                      [&](std::size_t j) -> const std::string& { return model.column(static_cast<int>(j)).name; });
}

std::vector<std::string> exported_row_names(const MILPModel& model) {
  return export_names(model.num_rows(), "R",
                      [&](std::size_t i) -> const std::string& { return model.row(static_cast<int>(i)).name; });
}

// ---------------------------------------------------------------------------
// MPS

std::string write_mps(const MILPModel& model, const std::string& name) {
  const auto cn = exported_column_names(model);
  const auto rn = exported_row_names(model);
  const auto cols = by_column(model);
  std::ostringstream out;
  out << "NAME          " << (valid_name(name) ? name : std::string("LINEA")) << "\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const char* s = model.row(i).sense == RowSense::LessEqual ? "L" : model.row(i).sense == RowSense::Equal ? "E" : "G";
    out << " " << s << "  " << rn[i] << "\n";
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto line = [&](const std::string& c, const std::string& r, double v) {
    out << "    " << pad(c, 8) << "  " << pad(r, 8) << "  " << number(v) << "\n";
  };
  for (int j = 0; j < model.num_columns(); ++j) {
    const bool is_int = model.column(j).kind == ColumnKind::Binary;
    if (is_int != in_int) {
      out << "    MARKER" << marker++ << "  'MARKER'  " << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = is_int;
    }
    const double cost = model.column(j).cost;
    if (cost != 0.0 || cols[j].empty()) line(cn[j], "OBJ", cost);
    for (const auto& [i, v] : cols[j]) line(cn[j], rn[i], v);
  }
  if (in_int) out << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";
  out << "RHS\n";
  for (int i = 0; i < model.num_rows(); ++i)
    if (model.row(i).rhs != 0.0) out << "    RHS       " << pad(rn[i], 8) << "  " << number(model.row(i).rhs) << "\n";
  out << "BOUNDS\n";
  for (int j = 0; j < model.num_columns(); ++j) {
    const auto& c = model.column(j);
    auto bound = [&](const char* type, const std::string* value) {
      out << " " << type << " BND       " << (value ? pad(cn[j], 8) + "  " + *value : cn[j]) << "\n";
    };
    if (c.lower == c.upper) {
      const std::string v = number(c.lower);
      bound("FX", &v);
      continue;
    }
    if (c.lower == -kInf && c.upper == kInf) {
      bound("FR", nullptr);
      continue;
    }
    if (c.lower == -kInf) {
      bound("MI", nullptr);
    } else {
      const std::string v = number(c.lower);
      bound("LO", &v);
    }
    if (c.upper == kInf) {
      bound("PL", nullptr);
    } else {
      const std::string v = number(c.upper);
      bound("UP", &v);
    }
  }
  out << "ENDATA\n";
  return out.str();
}

MILPModel read_mps(const std::string& text) {
  std::vector<PendingColumn> cols;
  std::vector<PendingRow> rows;
  std::unordered_map<std::string, int> col_index;
  std::unordered_map<std::string, int> row_index;
  std::string objective;
  bool objective_seen = false;
  enum class Section { None, Name, Rows, Columns, Rhs, Bounds, End } section = Section::None;
  bool in_int = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error("MPS line " + std::to_string(line_no) + ": " + msg);
  };
  auto column_of = [&](const std::string& name, bool create) -> int {
    auto it = col_index.find(name);
    if (it != col_index.end()) return it->second;
    if (!create) throw fail("unknown column " + name);
    PendingColumn c;
    c.name = name;
    c.kind = in_int ? ColumnKind::Binary : ColumnKind::Continuous;
    cols.push_back(c);
    col_index[name] = static_cast<int>(cols.size()) - 1;
    return static_cast<int>(cols.size()) - 1;
  };
  int last_column = -1;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '*') continue;
    std::istringstream ls(raw);
    std::vector<std::string> f;
    for (std::string tok; ls >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (!std::isspace(static_cast<unsigned char>(raw[0]))) {
      const std::string head = f[0];
      if (head == "NAME") section = Section::Name;
      else if (head == "ROWS") section = Section::Rows;
      else if (head == "COLUMNS") section = Section::Columns;
      else if (head == "RHS") section = Section::Rhs;
      else if (head == "BOUNDS") section = Section::Bounds;
      else if (head == "ENDATA") section = Section::End;
      else throw fail("unsupported section " + head);
      continue;
    }
    switch (section) {
      case Section::Rows: {
        if (f.size() != 2) throw fail("expected a row type and name");
        if (f[0] == "N") {
          if (objective_seen) continue;  // extra free rows are ignored
          objective = f[1];
          objective_seen = true;
          continue;
        }
        PendingRow r;
        r.name = f[1];
        if (f[0] == "L") r.sense = RowSense::LessEqual;
        else if (f[0] == "E") r.sense = RowSense::Equal;
        else if (f[0] == "G") r.sense = RowSense::GreaterEqual;
        else throw fail("unknown row type " + f[0]);
        if (!row_index.emplace(r.name, static_cast<int>(rows.size())).second) throw fail("duplicate row " + r.name);
        rows.push_back(std::move(r));
        break;
      }
      case Section::Columns: {
        if (f.size() == 3 && f[1] == "'MARKER'") {
          if (f[2] == "'INTORG'") in_int = true;
          else if (f[2] == "'INTEND'") in_int = false;
          else throw fail("unknown marker " + f[2]);
          continue;
        }
        if (f.size() != 3 && f.size() != 5) throw fail("expected column, row, value [, row, value]");
        const bool fresh = !col_index.count(f[0]);
        const int j = column_of(f[0], true);
        if (!fresh && j != last_column) throw fail("entries of column " + f[0] + " are not contiguous");
        last_column = j;
        for (std::size_t p = 1; p + 1 < f.size(); p += 2) {
          const double v = require_number(f[p + 1], "MPS line " + std::to_string(line_no));
          if (objective_seen && f[p] == objective) {
            cols[j].cost += v;
            continue;
          }
          auto it = row_index.find(f[p]);
          if (it == row_index.end()) throw fail("unknown row " + f[p]);
          rows[it->second].entries.push_back({j, v});
        }
        break;
      }
      case Section::Rhs: {
        if (f.size() != 3 && f.size() != 5 && f.size() != 2 && f.size() != 4) throw fail("malformed RHS entry");
        // The set name is optional; entries come in (row, value) pairs at the end.
        const std::size_t start = f.size() % 2 == 1 ? 1 : 0;
        for (std::size_t p = start; p + 1 < f.size(); p += 2) {
          const double v = require_number(f[p + 1], "MPS line " + std::to_string(line_no));
          if (objective_seen && f[p] == objective) continue;  // objective constants are not modelled
          auto it = row_index.find(f[p]);
          if (it == row_index.end()) throw fail("unknown row " + f[p]);
          rows[it->second].rhs = v;
        }
        break;
      }
      case Section::Bounds: {
        if (f.size() < 2) throw fail("malformed bound");
        const std::string& type = f[0];
        const bool valueless = type == "FR" || type == "MI" || type == "PL" || type == "BV";
        // With a value the layout is TYPE SET COLUMN VALUE; the set name may be absent.
        std::string col;
        std::string value;
        if (valueless) {
          col = f.back();
        } else {
          if (f.size() < 3) throw fail("bound " + type + " needs a value");
          col = f[f.size() - 2];
          value = f.back();
        }
        PendingColumn& c = cols[column_of(col, false)];
        const double v = valueless ? 0.0 : require_number(value, "MPS line " + std::to_string(line_no));
        if (type == "UP") {
          c.upper = v;
          c.upper_set = true;
        } else if (type == "LO") {
          c.lower = v;
        } else if (type == "FX") {
          c.lower = c.upper = v;
          c.upper_set = true;
        } else if (type == "FR") {
          c.lower = -kInf;
          c.upper = kInf;
          c.upper_set = true;
        } else if (type == "MI") {
          c.lower = -kInf;
        } else if (type == "PL") {
          c.upper = kInf;
          c.upper_set = true;
        } else if (type == "BV") {
          c.kind = ColumnKind::Binary;
          c.lower = 0.0;
          c.upper = 1.0;
          c.upper_set = true;
        } else {
          throw fail("unsupported bound type " + type);
        }
        break;
      }
      case Section::Name:
      case Section::None:
      case Section::End:
        throw fail("data outside of a section");
    }
  }
  if (section != Section::End) throw Error("MPS text has no ENDATA");
  return assemble(cols, rows);
}

// ---------------------------------------------------------------------------
// LP

namespace {

void write_terms(std::ostringstream& out, const std::vector<std::pair<double, std::string>>& terms) {
  int on_line = 0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& [v, n] = terms[t];
    if (on_line == 8) {
      out << "\n  ";
      on_line = 0;
    }
    const bool neg = std::signbit(v) && v != 0.0;
    if (t == 0)
      out << (neg ? "- " : "") << number(std::abs(v)) << " " << n;
    else
      out << " " << (neg ? "- " : "+ ") << number(std::abs(v)) << " " << n;
    ++on_line;
  }
}

class LpReader {
 public:
  explicit LpReader(const std::string& text) { tokenize(text); }

  MILPModel run() {
    expect_objective_header();
    parse_objective();
    if (keyword() == "subject" || keyword() == "such" || keyword() == "st" || keyword() == "s.t.") {
      if (keyword() == "subject" || keyword() == "such") {
        ++pos_;
        if (keyword() != "to" && keyword() != "that") throw fail("expected 'subject to'");
      }
      ++pos_;
      parse_constraints();
    }
    while (pos_ < tok_.size()) {
      const std::string k = keyword();
      if (k == "bounds" || k == "bound") {
        ++pos_;
        parse_bounds();
      } else if (k == "binaries" || k == "binary" || k == "bin") {
        ++pos_;
        parse_integers(true);
      } else if (k == "generals" || k == "general" || k == "gen" || k == "integers" || k == "integer") {
        ++pos_;
        parse_integers(false);
      } else if (k == "end") {
        ++pos_;
        break;
      } else {
        throw fail("unexpected '" + tok_[pos_] + "'");
      }
    }
    if (pos_ != tok_.size()) throw fail("text after End");
    return assemble(cols_, rows_);
  }

 private:
  Error fail(const std::string& msg) const {
    const int line = pos_ < line_.size() ? line_[pos_] : (line_.empty() ? 0 : line_.back());
    return Error("LP line " + std::to_string(line) + ": " + msg);
  }

  void tokenize(const std::string& text) {
    int line = 1;
    std::size_t i = 0;
    auto push = [&](std::string t) {
      tok_.push_back(std::move(t));
      line_.push_back(line);
    };
    while (i < text.size()) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '\\') {
        while (i < text.size() && text[i] != '\n') ++i;
      } else if (c == '<' || c == '>' || c == '=') {
        std::string op(1, c);
        if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' || text[i + 1] == '>')) op += text[++i];
        ++i;
        push(op);
      } else if (c == ':' || c == '+' || c == '-') {
        push(std::string(1, c));
        ++i;
      } else {
        std::size_t j = i;
        const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '.';
        while (j < text.size()) {
          const char d = text[j];
          if (std::isspace(static_cast<unsigned char>(d)) || d == '<' || d == '>' || d == '=' || d == ':' || d == '\\')
            break;
          if (d == '+' || d == '-') {
            if (!(numeric && j > i && (text[j - 1] == 'e' || text[j - 1] == 'E'))) break;
          }
          ++j;
        }
        push(text.substr(i, j - i));
        i = j;
      }
    }
  }

  std::string keyword() const { return pos_ < tok_.size() ? lower_case(tok_[pos_]) : std::string(); }

  bool at_section() const {
    const std::string k = keyword();
    if (k.empty()) return true;
    if (k == "subject" || k == "such") return pos_ + 1 < tok_.size() && (lower_case(tok_[pos_ + 1]) == "to" || lower_case(tok_[pos_ + 1]) == "that");
    return k == "st" || k == "s.t." || k == "bounds" || k == "bound" || k == "binaries" || k == "binary" ||
           k == "bin" || k == "generals" || k == "general" || k == "gen" || k == "integers" || k == "integer" ||
           k == "end";
  }

  static bool is_operator(const std::string& t) {
    return t == "<=" || t == "=<" || t == "<" || t == ">=" || t == "=>" || t == ">" || t == "=";
  }

  void expect_objective_header() {
    const std::string k = keyword();
    if (k == "minimize" || k == "minimise" || k == "min") {
      sign_ = 1.0;
    } else if (k == "maximize" || k == "maximise" || k == "max") {
      sign_ = -1.0;
    } else {
      throw fail("expected Minimize or Maximize");
    }
    ++pos_;
  }

  int column(const std::string& name) {
    if (!valid_name(name)) throw fail("invalid name '" + name + "'");
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    PendingColumn c;
    c.name = name;
    cols_.push_back(c);
    index_[name] = static_cast<int>(cols_.size()) - 1;
    return static_cast<int>(cols_.size()) - 1;
  }

  // Skips an optional "label :" prefix and returns the label.
  std::string label() {
    if (pos_ + 1 < tok_.size() && tok_[pos_ + 1] == ":") {
      std::string l = tok_[pos_];
      pos_ += 2;
      return l;
    }
    return std::string();
  }

  // Linear expression up to a relational operator or a section keyword.
  std::vector<RowEntry> expression() {
    std::vector<RowEntry> out;
    while (pos_ < tok_.size() && !is_operator(tok_[pos_]) && !at_section()) {
      double sign = 1.0;
      while (tok_[pos_] == "+" || tok_[pos_] == "-") {
        if (tok_[pos_] == "-") sign = -sign;
        if (++pos_ >= tok_.size()) throw fail("dangling sign");
      }
      double coef = 1.0;
      if (parse_number(tok_[pos_], coef)) {
        if (++pos_ >= tok_.size()) throw fail("coefficient without a column");
      } else {
        coef = 1.0;
      }
      if (is_operator(tok_[pos_]) || tok_[pos_] == "+" || tok_[pos_] == "-" || tok_[pos_] == ":")
        throw fail("expected a column name, found '" + tok_[pos_] + "'");
      out.push_back({column(tok_[pos_]), sign * coef});
      ++pos_;
    }
    return out;
  }

  double signed_number() {
    double sign = 1.0;
    while (pos_ < tok_.size() && (tok_[pos_] == "+" || tok_[pos_] == "-")) {
      if (tok_[pos_] == "-") sign = -sign;
      ++pos_;
    }
    if (pos_ >= tok_.size()) throw fail("expected a number");
    double v = 0.0;
    if (!parse_number(tok_[pos_], v)) throw fail("expected a number, found '" + tok_[pos_] + "'");
    ++pos_;
    return sign * v;
  }

  void parse_objective() {
    label();
    for (const auto& e : expression()) cols_[e.column].cost += sign_ * e.value;
  }

  void parse_constraints() {
    while (!at_section()) {
      PendingRow r;
      r.name = label();
      if (r.name.empty()) r.name = "R" + std::to_string(rows_.size());
      r.entries = expression();
      if (pos_ >= tok_.size() || !is_operator(tok_[pos_])) throw fail("constraint " + r.name + " has no relation");
      const std::string op = tok_[pos_++];
      r.sense = op[0] == '<' || op == "=<" ? RowSense::LessEqual
                : op[0] == '>' || op == "=>" ? RowSense::GreaterEqual
                                             : RowSense::Equal;
      r.rhs = signed_number();
      rows_.push_back(std::move(r));
    }
  }

  void apply(PendingColumn& c, const std::string& op, double v, bool column_on_left) {
    const bool le = op[0] == '<' || op == "=<";
    const bool ge = op[0] == '>' || op == "=>";
    if (!le && !ge) {
      c.lower = c.upper = v;
      c.upper_set = true;
      return;
    }
    // "x <= v" and "v >= x" bound from above.
    if (le == column_on_left) {
      c.upper = v;
      c.upper_set = true;
    } else {
      c.lower = v;
    }
  }

  void parse_bounds() {
    while (!at_section()) {
      const bool leading_number = tok_[pos_] == "+" || tok_[pos_] == "-" || [&] {
        double v;
        return parse_number(tok_[pos_], v);
      }();
      if (leading_number) {
        const double v = signed_number();
        if (pos_ >= tok_.size() || !is_operator(tok_[pos_])) throw fail("malformed bound");
        const std::string op = tok_[pos_++];
        PendingColumn& c = cols_[column(tok_.at(pos_++))];
        apply(c, op, v, false);
        if (pos_ < tok_.size() && is_operator(tok_[pos_])) {
          const std::string op2 = tok_[pos_++];
          apply(c, op2, signed_number(), true);
        }
      } else {
        PendingColumn& c = cols_[column(tok_[pos_++])];
        if (pos_ < tok_.size() && lower_case(tok_[pos_]) == "free") {
          ++pos_;
          c.lower = -kInf;
          c.upper = kInf;
          c.upper_set = true;
          continue;
        }
        if (pos_ >= tok_.size() || !is_operator(tok_[pos_])) throw fail("malformed bound");
        const std::string op = tok_[pos_++];
        apply(c, op, signed_number(), true);
      }
    }
  }

  void parse_integers(bool binary) {
    while (!at_section()) {
      PendingColumn& c = cols_[column(tok_[pos_++])];
      c.kind = ColumnKind::Binary;
      if (binary && !c.upper_set) {
        c.upper = 1.0;
        c.upper_set = true;
      }
    }
  }

  std::vector<std::string> tok_;
  std::vector<int> line_;
  std::size_t pos_ = 0;
  double sign_ = 1.0;
  std::vector<PendingColumn> cols_;
  std::vector<PendingRow> rows_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace

std::string write_lp(const MILPModel& model, const std::string& name) {
  const auto cn = exported_column_names(model);
  const auto rn = exported_row_names(model);
  std::ostringstream out;
  out << "\\ " << (valid_name(name) ? name : std::string("LINEA")) << "\n";
  out << "Minimize\n obj: ";
  std::vector<std::pair<double, std::string>> terms;
  for (int j = 0; j < model.num_columns(); ++j) terms.push_back({model.column(j).cost, cn[j]});
  write_terms(out, terms);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    out << " " << rn[i] << ": ";
    terms.clear();
    for (const auto& e : r.entries) terms.push_back({e.value, cn[e.column]});
    if (terms.empty()) {
      if (model.num_columns() == 0) throw Error("write_lp: a row without entries needs at least one column");
      terms.push_back({0.0, cn[0]});
    }
    write_terms(out, terms);
    const char* op = r.sense == RowSense::LessEqual ? "<=" : r.sense == RowSense::Equal ? "=" : ">=";
    out << " " << op << " " << number(r.rhs) << "\n";
  }
  out << "Bounds\n";
  std::vector<std::string> binaries;
  std::vector<std::string> generals;
  for (int j = 0; j < model.num_columns(); ++j) {
    const auto& c = model.column(j);
    if (c.lower == c.upper)
      out << " " << cn[j] << " = " << number(c.lower) << "\n";
    else if (c.lower == -kInf && c.upper == kInf)
      out << " " << cn[j] << " free\n";
    else
      out << " " << number(c.lower) << " <= " << cn[j] << " <= " << number(c.upper) << "\n";
    if (c.kind == ColumnKind::Binary) (c.lower == 0.0 && c.upper == 1.0 ? binaries : generals).push_back(cn[j]);
  }
  auto listing = [&](const char* title, const std::vector<std::string>& names) {
    if (names.empty()) return;
    out << title << "\n";
    for (std::size_t t = 0; t < names.size(); ++t) out << " " << names[t] << (t % 8 == 7 ? "\n" : "");
    if (names.size() % 8 != 0) out << "\n";
  };
  listing("Binaries", binaries);
  listing("Generals", generals);
  out << "End\n";
  return out.str();
}

MILPModel read_lp(const std::string& text) { return LpReader(text).run(); }

}  // namespace linea
