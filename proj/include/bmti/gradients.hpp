// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bmti/intrinsic_dim.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/parallel.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per-point gradient of F = -log rho, its D x D autocovariance, and the
/// mean shift it was derived from.
class GradientField {
 public:
  GradientField() = default;
  GradientField(std::size_t n, std::size_t dim, double d);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  double intrinsic_dim() const noexcept { return d_; }

  Eigen::Map<const Vector> g(std::size_t i) const { return {g_.data() + i * dim_, static_cast<Eigen::Index>(dim_)}; }
  Eigen::Map<Vector> g(std::size_t i) { return {g_.data() + i * dim_, static_cast<Eigen::Index>(dim_)}; }
  Eigen::Map<const Vector> mean_shift(std::size_t i) const {
    return {shift_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
  }
  Eigen::Map<Vector> mean_shift(std::size_t i) {
    return {shift_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
  }
  Eigen::Map<const Matrix> var(std::size_t i) const {
    const auto d = static_cast<Eigen::Index>(dim_);
    return {var_.data() + i * dim_ * dim_, d, d};
  }
  Eigen::Map<Matrix> var(std::size_t i) {
    const auto d = static_cast<Eigen::Index>(dim_);
    return {var_.data() + i * dim_ * dim_, d, d};
  }

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  double d_ = 0.0;
  std::vector<double> g_;
  std::vector<double> shift_;
  std::vector<double> var_;
};

/// Mean of x_j - x_i over the k_i - 1 neighbours of i.
Vector sample_mean_shift(const NeighborGraph& graph, const PointCloud& cloud, std::size_t i);

/// -(d + 2) / r^2 * mean shift, with r the neighbourhood radius of i.
Vector estimate_gradient(const NeighborGraph& graph, const PointCloud& cloud,
                         const IntrinsicDim& id, std::size_t i);

/// ((d+2)/r^2)^2 / (k_i - 2) * [sum s s^T / (k_i - 1) - m m^T], accumulated in
/// centred form. Negative eigenvalues below 1e-12 * trace are clipped to zero;
/// larger ones raise DataError.
Matrix gradient_autocovariance(const NeighborGraph& graph, const PointCloud& cloud,
                               const IntrinsicDim& id, std::size_t i);

/// Cross-covariance of the gradient estimates at i and j, averaged over the
/// neighbours shared by Omega_i and Omega_j (centres i and j excluded). Zero
/// when no neighbour is shared. For i == j this is the autocovariance bracket
/// without Bessel's correction, divided by k_i - 1.
Matrix gradient_cross_covariance(const NeighborGraph& graph, const PointCloud& cloud,
                                 const IntrinsicDim& id, std::size_t i, std::size_t j);

GradientField compute_gradient_field(const NeighborGraph& graph, const PointCloud& cloud,
                                     const IntrinsicDim& id, Exec exec = Exec::parallel);

}  // namespace bmti
