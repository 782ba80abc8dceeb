#pragma once

// Sparse LU of a simplex basis. Column and row singletons are peeled off
// first; the remaining kernel is factored with Markowitz pivot selection and
// threshold partial pivoting. Solves skip zero pivots, so sparse right-hand
// sides stay cheap.

#include <vector>

namespace linea::detail {

struct SparseColumn {
  std::vector<int> rows;
  std::vector<double> values;
};

class BasisLU {
 public:
  /// Factorizes the m x m matrix whose columns are given. Returns false when
  /// the matrix is numerically singular; `unpivoted_rows()` and
  /// `unpivoted_columns()` then list the rows and column positions left over.
  bool factorize(int m, const std::vector<SparseColumn>& columns);

  /// Solves B x = b in place. b is indexed by row, the result by column position.
  void ftran(std::vector<double>& v) const;
  /// Solves B^T y = d in place. d is indexed by column position, the result by row.
  void btran(std::vector<double>& v) const;

  const std::vector<int>& unpivoted_rows() const { return bad_rows_; }
  const std::vector<int>& unpivoted_columns() const { return bad_cols_; }
  long nonzeros() const { return static_cast<long>(l_row_.size() + u_col_.size()) + m_; }

 private:
  int m_ = 0;
  // Pivot sequence.
  std::vector<int> piv_row_;
  std::vector<int> piv_col_;
  std::vector<double> diag_;
  // Row operations: for pivot k, row i -= mult * row piv_row_[k].
  std::vector<int> l_start_, l_row_;
  std::vector<double> l_val_;
  // U by pivot (row-wise): entries u(k, column position).
  std::vector<int> u_start_, u_col_;
  std::vector<double> u_val_;
  // U by column position: entries (pivot index, value).
  std::vector<int> uc_start_, uc_piv_;
  std::vector<double> uc_val_;
  std::vector<int> bad_rows_, bad_cols_;
  mutable std::vector<double> work_;
};

}  // namespace linea::detail
