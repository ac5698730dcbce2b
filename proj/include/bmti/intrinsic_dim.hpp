// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "bmti/knn.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

struct IntrinsicDim {
  double d = 0.0;
  std::size_t n_used = 0;
  std::string method;
  /// Points dropped because their first-neighbour distance was zero.
  std::size_t n_skipped = 0;
};

/// TwoNN estimate from the ratios mu = r2/r1.
///
/// The largest `discard_fraction` of ratios is dropped and d is the slope of
/// -log(1 - F(mu)) against log(mu) through the origin. With no discarding the
/// Pareto maximum-likelihood estimate n / sum(log mu) is returned. The result
/// is clamped to (0, D].
IntrinsicDim estimate_id_twonn(const PointCloud& cloud, double discard_fraction = 0.1,
                               Exec exec = Exec::parallel);

/// Same estimate from a precomputed neighbour table with k >= 2.
IntrinsicDim estimate_id_twonn(const KnnTable& table, std::size_t embed_dim,
                               double discard_fraction = 0.1);

/// Wraps a user-supplied dimension; checks 0 < d <= D.
IntrinsicDim fixed_id(double d, std::size_t embed_dim);

}  // namespace bmti
