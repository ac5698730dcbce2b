// SPDX-License-Identifier: Apache-2.0

#include "bmti/delta_f.hpp"

#include <cmath>
#include <string>

#include "bmti/error.hpp"
#include "bmti/evaluation.hpp"

namespace bmti {

namespace {

// r^T V r summed in a fixed order so that the value for (i,j) and (j,i) agrees
// bitwise: the components of r flip sign together and the products cancel it.
double quadratic_form(const Eigen::Map<const Matrix>& v, std::span<const double> xi,
                      std::span<const double> xj) {
  const std::size_t dim = xi.size();
  double s = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    const double ra = xj[a] - xi[a];
    double row = 0.0;
    for (std::size_t b = 0; b < dim; ++b) row += v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * (xj[b] - xi[b]);
    s += ra * row;
  }
  return s;
}

double dot_shift(const Eigen::Map<const Vector>& g, std::span<const double> xi,
                 std::span<const double> xj) {
  double s = 0.0;
  for (std::size_t a = 0; a < xi.size(); ++a) s += g[static_cast<Eigen::Index>(a)] * (xj[a] - xi[a]);
  return s;
}

double checked_std(double q, std::size_t i, std::size_t j) {
  if (q >= 0.0) return std::sqrt(q);
  if (q > -1e-12) return 0.0;
  throw DataError("negative directional variance on edge " + std::to_string(i) + "->" + std::to_string(j));
}

}  // namespace

void DeltaFEdgeSet::resize(std::size_t m) {
  for (auto* v : {&source, &target}) v->resize(m);
  for (auto* v : {&delta_f, &eps2, &dir_i, &dir_j, &eps_i, &eps_j, &pearson}) v->resize(m);
}

double estimate_delta_f(const GradientField& grads, const PointCloud& cloud, std::size_t i,
                        std::size_t j) {
  // Half-sum of the two directional values: for (j,i) both flip sign exactly.
  const auto xi = cloud.point(i);
  const auto xj = cloud.point(j);
  return 0.5 * (dot_shift(grads.g(i), xi, xj) + dot_shift(grads.g(j), xi, xj));
}

Directional directional_delta_f(const GradientField& grads, const PointCloud& cloud, std::size_t i,
                                std::size_t j, Endpoint which) {
  const std::size_t w = which == Endpoint::source ? i : j;
  const auto xi = cloud.point(i);
  const auto xj = cloud.point(j);
  return {dot_shift(grads.g(w), xi, xj), checked_std(quadratic_form(grads.var(w), xi, xj), i, j)};
}

EdgeVariance delta_f_variance(double dir_i, double dir_j, double eps_i, double eps_j,
                              double jaccard, double eps2_min) {
  const double p = sign_of(dir_i * dir_j) * jaccard;
  const double raw = 0.25 * (eps_i * eps_i + eps_j * eps_j + 2.0 * p * (eps_i * eps_j));
  return {std::max(raw, eps2_min), p};
}

EdgeVariance delta_f_variance(const GradientField& grads, const PointCloud& cloud,
                              const NeighborGraph& graph, std::size_t i, std::size_t j,
                              double eps2_min) {
  const auto di = directional_delta_f(grads, cloud, i, j, Endpoint::source);
  const auto dj = directional_delta_f(grads, cloud, i, j, Endpoint::target);
  return delta_f_variance(di.value, dj.value, di.std, dj.std, jaccard_overlap(graph, i, j), eps2_min);
}

DeltaFEdgeSet build_edge_set(const NeighborGraph& graph, const GradientField& grads,
                             const PointCloud& cloud, double eps2_min, Exec exec) {
  if (!(eps2_min > 0.0)) throw ParameterError("build_edge_set: eps2_min must be positive");
  const std::size_t m = graph.n_edges();
  DeltaFEdgeSet out;
  out.resize(m);
  for_each_index(graph.size(), exec, [&](std::size_t i) {
    const std::size_t ki = graph.k(i);
    for (std::size_t e = graph.edge_offset(i); e < graph.edge_offset(i) + ki - 1; ++e) {
      const std::size_t j = graph.edge_target(e);
      const auto di = directional_delta_f(grads, cloud, i, j, Endpoint::source);
      const auto dj = directional_delta_f(grads, cloud, i, j, Endpoint::target);
      const double kij = static_cast<double>(graph.edge_overlap(e));
      const double jac = kij / (static_cast<double>(ki) + static_cast<double>(graph.k(j)) - kij);
      const auto var = delta_f_variance(di.value, dj.value, di.std, dj.std, jac, eps2_min);
      out.source[e] = i;
      out.target[e] = j;
      out.dir_i[e] = di.value;
      out.dir_j[e] = dj.value;
      out.eps_i[e] = di.std;
      out.eps_j[e] = dj.std;
      out.delta_f[e] = 0.5 * (di.value + dj.value);
      out.eps2[e] = var.eps2;
      out.pearson[e] = var.pearson;
    }
  });
  return out;
}

double covariance_entry(const DeltaFEdgeSet& edges, std::size_t a, std::size_t b,
                        const NeighborGraph& graph) {
  const std::size_t ends_a[2] = {edges.source[a], edges.target[a]};
  const std::size_t ends_b[2] = {edges.source[b], edges.target[b]};
  const double dir_a[2] = {edges.dir_i[a], edges.dir_j[a]};
  const double dir_b[2] = {edges.dir_i[b], edges.dir_j[b]};
  const double eps_a[2] = {edges.eps_i[a], edges.eps_j[a]};
  const double eps_b[2] = {edges.eps_i[b], edges.eps_j[b]};
  double c = 0.0;
  for (int w = 0; w < 2; ++w)
    for (int v = 0; v < 2; ++v)
      c += sign_of(dir_a[w] * dir_b[v]) * jaccard_overlap(graph, ends_a[w], ends_b[v]) *
           (eps_a[w] * eps_b[v]);
  return 0.25 * c;
}

PullReport calibration_report(const DeltaFEdgeSet& edges, const PointCloud& cloud) {
  const auto truth = cloud.truth();
  std::vector<double> est(edges.size()), err(edges.size()), ref(edges.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    est[e] = edges.delta_f[e];
    err[e] = std::sqrt(edges.eps2[e]);
    ref[e] = truth[edges.target[e]] - truth[edges.source[e]];
    sxy += ref[e] * est[e];
    sxx += ref[e] * ref[e];
  }
  const auto stats = pull_statistics(est, err, ref);
  PullReport r;
  r.n = stats.n;
  r.mean = stats.mean;
  r.std = stats.std;
  r.ks_distance = stats.ks_distance;
  r.parity_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return r;
}

}  // namespace bmti
