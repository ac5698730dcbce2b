// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmti/parallel.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

struct BaselineEstimate {
  std::vector<double> F;
  std::string method;
  /// k for knn, bandwidth for gkde.
  double param = 0.0;
};

/// round(N^(D/(D+4))) clamped to [k_min, N-1].
std::size_t abramson_k(std::size_t n, std::size_t dim, std::size_t k_min = 4);

/// F_i = -log(k / (N omega_d r_k^d)), r_k the distance to the k-th neighbour.
BaselineEstimate knn_density(const PointCloud& cloud, double d, std::size_t k,
                             Exec exec = Exec::parallel);

/// sigma_bar * (4 / ((D + 2) N))^(1 / (D + 4)), sigma_bar the mean per-axis
/// sample standard deviation.
double silverman_bandwidth(const PointCloud& cloud);

/// -log of the isotropic Gaussian KDE at `query`, over `n` samples stored
/// row-major in `samples`. Summed with log-sum-exp.
double gkde_evaluate(std::span<const double> samples, std::size_t dim, double h,
                     std::span<const double> query);

/// GKDE at every sample point, self term included. Bandwidth defaults to Silverman.
BaselineEstimate gkde_density(const PointCloud& cloud, std::optional<double> bandwidth = std::nullopt,
                              Exec exec = Exec::parallel);

}  // namespace bmti
