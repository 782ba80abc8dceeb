#include "basis_lu.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace linea::detail {

namespace {

constexpr double kSingular = 1e-11;
constexpr double kThreshold = 0.1;  // relative pivot size within its column

}  // namespace

bool BasisLU::factorize(int m, const std::vector<SparseColumn>& columns) {
  m_ = m;
  piv_row_.clear();
  piv_col_.clear();
  diag_.clear();
  l_start_.assign(1, 0);
  l_row_.clear();
  l_val_.clear();
  u_start_.assign(1, 0);
  u_col_.clear();
  u_val_.clear();
  bad_rows_.clear();
  bad_cols_.clear();
  work_.assign(m, 0.0);

  std::vector<std::vector<std::pair<int, double>>> row_entries(m);
  std::vector<std::vector<int>> col_rows(m);
  std::vector<int> col_count(m, 0);
  for (int c = 0; c < m; ++c) {
    const auto& col = columns[c];
    for (std::size_t p = 0; p < col.rows.size(); ++p) {
      if (col.values[p] == 0.0) continue;
      row_entries[col.rows[p]].push_back({c, col.values[p]});
      col_rows[c].push_back(col.rows[p]);
      ++col_count[c];
    }
  }
  std::vector<char> row_active(m, 1);
  std::vector<char> col_active(m, 1);
  std::vector<int> scatter(m, -1);
  std::vector<int> col_queue;
  std::vector<int> row_queue;
  std::vector<std::vector<int>> buckets;  // built lazily when the kernel is reached
  for (int c = 0; c < m; ++c)
    if (col_count[c] == 1) col_queue.push_back(c);
  for (int r = 0; r < m; ++r)
    if (row_entries[r].size() == 1) row_queue.push_back(r);

  auto find = [&](int r, int c) -> int {
    const auto& re = row_entries[r];
    for (std::size_t k = 0; k < re.size(); ++k)
      if (re[k].first == c) return static_cast<int>(k);
    return -1;
  };

  auto pivot = [&](int r, int c) {
    auto& pr = row_entries[r];
    const double pv = pr[find(r, c)].second;
    for (int i : col_rows[c]) {
      if (i == r || !row_active[i]) continue;
      auto& ri = row_entries[i];
      const int ic = find(i, c);
      if (ic < 0) continue;
      const double mult = ri[ic].second / pv;
      ri[ic] = ri.back();
      ri.pop_back();
      for (std::size_t k = 0; k < ri.size(); ++k) scatter[ri[k].first] = static_cast<int>(k);
      for (const auto& [j, a] : pr) {
        if (j == c) continue;
        if (scatter[j] >= 0) {
          ri[scatter[j]].second -= mult * a;
        } else {
          scatter[j] = static_cast<int>(ri.size());
          ri.push_back({j, -mult * a});
          col_rows[j].push_back(i);
          ++col_count[j];
          if (!buckets.empty()) buckets[col_count[j]].push_back(j);
        }
      }
      for (const auto& e : ri) scatter[e.first] = -1;
      l_row_.push_back(i);
      l_val_.push_back(mult);
      if (ri.size() == 1) row_queue.push_back(i);
    }
    l_start_.push_back(static_cast<int>(l_row_.size()));
    for (const auto& [j, a] : pr) {
      if (j == c) continue;
      u_col_.push_back(j);
      u_val_.push_back(a);
      if (--col_count[j] == 1) col_queue.push_back(j);
      if (!buckets.empty() && col_count[j] > 0) buckets[col_count[j]].push_back(j);
    }
    u_start_.push_back(static_cast<int>(u_col_.size()));
    diag_.push_back(pv);
    piv_row_.push_back(r);
    piv_col_.push_back(c);
    row_active[r] = 0;
    col_active[c] = 0;
    col_count[c] = 0;
  };

  while (static_cast<int>(piv_row_.size()) < m) {
    bool done = false;
    while (!col_queue.empty() && !done) {
      const int c = col_queue.back();
      col_queue.pop_back();
      if (!col_active[c] || col_count[c] != 1) continue;
      for (int r : col_rows[c]) {
        if (!row_active[r]) continue;
        const int k = find(r, c);
        if (k < 0) continue;
        if (std::abs(row_entries[r][k].second) > kSingular) {
          pivot(r, c);
          done = true;
        }
        break;
      }
    }
    if (done) continue;
    while (!row_queue.empty() && !done) {
      const int r = row_queue.back();
      row_queue.pop_back();
      if (!row_active[r] || row_entries[r].size() != 1) continue;
      const auto [c, a] = row_entries[r][0];
      // A row singleton is only safe if it is a large entry of its column.
      double colmax = 0.0;
      for (int i : col_rows[c])
        if (row_active[i])
          if (int k = find(i, c); k >= 0) colmax = std::max(colmax, std::abs(row_entries[i][k].second));
      if (std::abs(a) > kSingular && std::abs(a) >= kThreshold * colmax) {
        pivot(r, c);
        done = true;
      }
    }
    if (done) continue;

    // Markowitz search over the remaining kernel, visiting columns by
    // increasing count and stopping once no cheaper pivot is possible.
    if (buckets.empty()) {
      buckets.assign(m + 1, {});
      for (int c = 0; c < m; ++c)
        if (col_active[c] && col_count[c] > 0) buckets[col_count[c]].push_back(c);
    }
    int best_r = -1;
    int best_c = -1;
    long best_cost = -1;
    double best_abs = 0.0;
    int examined = 0;
    for (int count = 1; count <= m && best_cost != 0; ++count) {
      if (best_cost >= 0 && static_cast<long>(count - 1) * (count - 1) >= best_cost && examined >= 4) break;
      auto& bucket = buckets[count];
      for (std::size_t q = 0; q < bucket.size(); ++q) {
        const int c = bucket[q];
        if (!col_active[c] || col_count[c] != count) {
          bucket[q--] = bucket.back();
          bucket.pop_back();
          continue;
        }
        double colmax = 0.0;
        for (int i : col_rows[c])
          if (row_active[i])
            if (int k = find(i, c); k >= 0) colmax = std::max(colmax, std::abs(row_entries[i][k].second));
        if (colmax <= kSingular) continue;
        ++examined;
        for (int i : col_rows[c]) {
          if (!row_active[i]) continue;
          const int k = find(i, c);
          if (k < 0) continue;
          const double a = std::abs(row_entries[i][k].second);
          if (a < kThreshold * colmax || a <= kSingular) continue;
          const long cost = static_cast<long>(row_entries[i].size() - 1) * (count - 1);
          if (best_cost < 0 || cost < best_cost || (cost == best_cost && a > best_abs)) {
            best_cost = cost;
            best_r = i;
            best_c = c;
            best_abs = a;
          }
        }
        if (examined >= 4 && best_cost >= 0) break;
      }
    }
    if (best_r < 0) break;
    pivot(best_r, best_c);
  }

  const int done = static_cast<int>(piv_row_.size());
  if (done < m) {
    for (int r = 0; r < m; ++r)
      if (row_active[r]) bad_rows_.push_back(r);
    for (int c = 0; c < m; ++c)
      if (col_active[c]) bad_cols_.push_back(c);
    return false;
  }

  // Column-wise copy of U for the backward pass of ftran.
  std::vector<int> counts(m + 1, 0);
  for (int c : u_col_) ++counts[c + 1];
  uc_start_.assign(m + 1, 0);
  for (int c = 0; c < m; ++c) uc_start_[c + 1] = uc_start_[c] + counts[c + 1];
  uc_piv_.resize(u_col_.size());
  uc_val_.resize(u_col_.size());
  std::vector<int> fill(uc_start_.begin(), uc_start_.end() - 1);
  for (int k = 0; k < m; ++k)
    for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) {
      const int c = u_col_[p];
      uc_piv_[fill[c]] = k;
      uc_val_[fill[c]++] = u_val_[p];
    }
  return true;
}

void BasisLU::ftran(std::vector<double>& v) const {
  auto& w = work_;
  std::copy(v.begin(), v.begin() + m_, w.begin());
  for (int k = 0; k < m_; ++k) {
    const double b = w[piv_row_[k]];
    if (b == 0.0) continue;
    for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) w[l_row_[p]] -= l_val_[p] * b;
  }
  for (int k = m_ - 1; k >= 0; --k) {
    const int c = piv_col_[k];
    const double x = w[piv_row_[k]] / diag_[k];
    v[c] = x;
    if (x == 0.0) continue;
    for (int p = uc_start_[c]; p < uc_start_[c + 1]; ++p) w[piv_row_[uc_piv_[p]]] -= uc_val_[p] * x;
  }
}

void BasisLU::btran(std::vector<double>& v) const {
  auto& w = work_;
  for (int k = 0; k < m_; ++k) {
    const double z = v[piv_col_[k]] / diag_[k];
    w[piv_row_[k]] = z;
    if (z == 0.0) continue;
    for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) v[u_col_[p]] -= u_val_[p] * z;
  }
  for (int k = m_ - 1; k >= 0; --k) {
    double s = 0.0;
    for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) s += l_val_[p] * w[l_row_[p]];
    w[piv_row_[k]] -= s;
  }
  std::copy(w.begin(), w.begin() + m_, v.begin());
}

}  // namespace linea::detail
