// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bmti/parallel.hpp"

namespace bmti {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Square CSR matrix with sorted, merged column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Duplicate (row, col) entries are summed in input order.
  SparseMatrix(std::size_t n, std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  double coeff(std::size_t r, std::size_t c) const;
  void multiply(std::span<const double> x, std::span<double> y, Exec exec = Exec::parallel) const;
  std::vector<double> diagonal() const;
  Eigen::MatrixXd to_dense() const;

  /// a * this + diag(d).
  SparseMatrix scaled_plus_diagonal(double a, std::span<const double> d) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

}  // namespace bmti
