// SPDX-License-Identifier: Apache-2.0

#include "bmti/intrinsic_dim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bmti/error.hpp"

namespace bmti {

IntrinsicDim estimate_id_twonn(const KnnTable& table, std::size_t embed_dim,
                               double discard_fraction) {
  if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
    throw ParameterError("estimate_id_twonn: discard_fraction must lie in [0, 1)");
  if (table.k < 2) throw ParameterError("estimate_id_twonn: neighbour table needs k >= 2");
  if (table.n < 10) throw ParameterError("estimate_id_twonn: at least 10 points are required");

  std::vector<double> log_mu;
  log_mu.reserve(table.n);
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < table.n; ++i) {
    const auto r = table.dists(i);
    if (!(r[0] > 0.0)) {
      ++skipped;
      continue;
    }
    log_mu.push_back(std::log(r[1] / r[0]));
  }
  if (log_mu.empty()) throw DataError("estimate_id_twonn: all points coincide with a neighbour");

  std::sort(log_mu.begin(), log_mu.end());
  const auto n_keep = static_cast<std::size_t>(
      std::floor(static_cast<double>(log_mu.size()) * (1.0 - discard_fraction)));
  if (n_keep == 0) throw DataError("estimate_id_twonn: no ratios left after discarding");

  IntrinsicDim out;
  out.method = "twonn";
  out.n_used = n_keep;
  out.n_skipped = skipped;
  const double dim = static_cast<double>(embed_dim);

  // Without truncation the Pareto MLE is used. With truncation, the kept
  // ratios are fitted to the empirical CDF, -log(1 - F(mu)) = d log(mu),
  // through the origin.
  double estimate = 0.0;
  if (n_keep == log_mu.size()) {
    double sum = 0.0;
    for (double v : log_mu) sum += v;
    estimate = sum > 0.0 ? static_cast<double>(n_keep) / sum : dim;
  } else {
    const auto n_all = static_cast<double>(log_mu.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < n_keep; ++t) {
      const double y = -std::log1p(-static_cast<double>(t + 1) / n_all);
      sxy += log_mu[t] * y;
      sxx += log_mu[t] * log_mu[t];
    }
    estimate = sxx > 0.0 ? sxy / sxx : dim;
  }
  out.d = std::min(estimate, dim);
  return out;
}

IntrinsicDim estimate_id_twonn(const PointCloud& cloud, double discard_fraction, Exec exec) {
  if (cloud.size() < 10) throw ParameterError("estimate_id_twonn: at least 10 points are required");
  return estimate_id_twonn(all_knn(cloud, 2, exec), cloud.dim(), discard_fraction);
}

IntrinsicDim fixed_id(double d, std::size_t embed_dim) {
  if (!(d > 0.0) || !std::isfinite(d) || d > static_cast<double>(embed_dim))
    throw ParameterError("fixed_id: intrinsic dimension must lie in (0, D]");
  return {d, 0, "fixed", 0};
}

}  // namespace bmti
