// SPDX-License-Identifier: Apache-2.0

#include "bmti/sparse.hpp"

#include <algorithm>

#include "bmti/error.hpp"

namespace bmti {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<Triplet> triplets) : n_(n) {
  for (const auto& t : triplets)
    if (t.row >= n || t.col >= n) throw ParameterError("SparseMatrix: index out of range");
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
  });
  row_ptr_.assign(n + 1, 0);
  cols_.reserve(triplets.size());
  values_.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const auto& tr = triplets[t];
    if (t > 0 && triplets[t - 1].row == tr.row && triplets[t - 1].col == tr.col) {
      values_.back() += tr.value;
      continue;
    }
    cols_.push_back(tr.col);
    values_.push_back(tr.value);
    ++row_ptr_[tr.row + 1];
  }
  for (std::size_t r = 0; r < n; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto cols = row_cols(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y, Exec exec) const {
  for_each_index(n_, exec, [&](std::size_t r) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[cols_[p]];
    y[r] = s;
  });
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) d[r] = coeff(r, r);
  return d;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[p])) = values_[p];
  return m;
}

SparseMatrix SparseMatrix::scaled_plus_diagonal(double a, std::span<const double> d) const {
  if (d.size() != n_) throw ParameterError("scaled_plus_diagonal: length mismatch");
  std::vector<Triplet> t;
  t.reserve(values_.size() + n_);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({r, cols_[p], a * values_[p]});
  for (std::size_t r = 0; r < n_; ++r) t.push_back({r, r, d[r]});
  return SparseMatrix(n_, std::move(t));
}

}  // namespace bmti
