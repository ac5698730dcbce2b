// SPDX-License-Identifier: Apache-2.0

#include "bmti/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bmti/error.hpp"
#include "bmti/knn.hpp"

namespace bmti {

std::size_t abramson_k(std::size_t n, std::size_t dim, std::size_t k_min) {
  if (n < 2 || dim == 0) throw ParameterError("abramson_k: need N >= 2 and D >= 1");
  const double dd = static_cast<double>(dim);
  const auto k = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), dd / (dd + 4.0))));
  return std::clamp(k, std::min(k_min, n - 1), n - 1);
}

BaselineEstimate knn_density(const PointCloud& cloud, double d, std::size_t k, Exec exec) {
  const std::size_t n = cloud.size();
  if (k < 1 || k > n - 1) throw ParameterError("knn_density: k must lie in [1, N-1]");
  const double log_omega = log_unit_ball_volume(d);
  const double log_kn = std::log(static_cast<double>(k)) - std::log(static_cast<double>(n));
  const KnnTable table = all_knn(cloud, k, exec);
  BaselineEstimate out{std::vector<double>(n), "knn", static_cast<double>(k)};
  for (std::size_t i = 0; i < n; ++i) {
    const double r = table.dists(i)[k - 1];
    if (!(r > 0.0)) throw DataError("knn_density: duplicate points (zero distance) at " + std::to_string(i));
    out.F[i] = -(log_kn - log_omega - d * std::log(r));
  }
  return out;
}

double silverman_bandwidth(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const std::size_t dim = cloud.dim();
  double sigma_sum = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += cloud.point(i)[a];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = cloud.point(i)[a] - mean;
      ss += c * c;
    }
    sigma_sum += std::sqrt(ss / static_cast<double>(n - 1));
  }
  const double sigma = sigma_sum / static_cast<double>(dim);
  if (!(sigma > 0.0)) throw DataError("silverman_bandwidth: data has zero variance");
  const double dd = static_cast<double>(dim);
  return sigma * std::pow(4.0 / ((dd + 2.0) * static_cast<double>(n)), 1.0 / (dd + 4.0));
}

double gkde_evaluate(std::span<const double> samples, std::size_t dim, double h,
                     std::span<const double> query) {
  if (!(h > 0.0)) throw ParameterError("gkde: bandwidth must be positive");
  if (dim == 0 || samples.empty() || samples.size() % dim != 0 || query.size() != dim)
    throw ParameterError("gkde: inconsistent dimensions");
  const std::size_t n = samples.size() / dim;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    lo = std::min(lo, squared_distance(query, samples.subspan(j * dim, dim)));
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    acc += std::exp(-(squared_distance(query, samples.subspan(j * dim, dim)) - lo) * inv2h2);
  const double log_density = -lo * inv2h2 + std::log(acc) - std::log(static_cast<double>(n)) -
                             0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * h * h);
  return -log_density;
}

BaselineEstimate gkde_density(const PointCloud& cloud, std::optional<double> bandwidth, Exec exec) {
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(cloud);
  if (!(h > 0.0)) throw ParameterError("gkde_density: bandwidth must be positive");
  BaselineEstimate out{std::vector<double>(cloud.size()), "gkde", h};
  for_each_index(cloud.size(), exec, [&](std::size_t i) {
    out.F[i] = gkde_evaluate(cloud.coords(), cloud.dim(), h, cloud.point(i));
  });
  return out;
}

}  // namespace bmti
