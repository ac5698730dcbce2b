// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmti/gradients.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/parallel.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

inline constexpr double kDefaultEps2Min = 1e-12;

/// One row per directed graph edge (source, target), in graph edge order.
struct DeltaFEdgeSet {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
  std::vector<double> delta_f;
  std::vector<double> eps2;
  std::vector<double> dir_i;
  std::vector<double> dir_j;
  std::vector<double> eps_i;
  std::vector<double> eps_j;
  std::vector<double> pearson;

  std::size_t size() const noexcept { return source.size(); }
  void resize(std::size_t m);
};

enum class Endpoint { source, target };

struct Directional {
  double value;
  double std;
};

/// sgn with sgn(0) = +1.
inline double sign_of(double x) noexcept { return x < 0.0 ? -1.0 : 1.0; }

/// ((g_i + g_j) / 2) . (x_j - x_i)
double estimate_delta_f(const GradientField& grads, const PointCloud& cloud, std::size_t i,
                        std::size_t j);

/// g_w . r_ij and sqrt(r_ij^T var[g_w] r_ij) for w = i (source) or j (target).
Directional directional_delta_f(const GradientField& grads, const PointCloud& cloud, std::size_t i,
                                std::size_t j, Endpoint which);

struct EdgeVariance {
  double eps2;
  double pearson;
};

/// p = sgn(dir_i dir_j) * jaccard; eps2 = (e_i^2 + e_j^2 + 2 p e_i e_j) / 4,
/// floored at eps2_min.
EdgeVariance delta_f_variance(double dir_i, double dir_j, double eps_i, double eps_j,
                              double jaccard, double eps2_min = kDefaultEps2Min);

EdgeVariance delta_f_variance(const GradientField& grads, const PointCloud& cloud,
                              const NeighborGraph& graph, std::size_t i, std::size_t j,
                              double eps2_min = kDefaultEps2Min);

DeltaFEdgeSet build_edge_set(const NeighborGraph& graph, const GradientField& grads,
                             const PointCloud& cloud, double eps2_min = kDefaultEps2Min,
                             Exec exec = Exec::parallel);

/// C_{ab} between edges a and b of `edges`: a quarter of the sum over the
/// four endpoint pairings of sgn(dir^w_a dir^v_b) * jaccard(w, v) * eps^w_a * eps^v_b.
double covariance_entry(const DeltaFEdgeSet& edges, std::size_t a, std::size_t b,
                        const NeighborGraph& graph);

struct PullReport {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double ks_distance = 0.0;
  /// Least-squares slope of delta_f on the true difference.
  double parity_slope = 0.0;
};

/// Edge pulls (delta_f - (F_j - F_i)) / sqrt(eps2) against the cloud's truth.
PullReport calibration_report(const DeltaFEdgeSet& edges, const PointCloud& cloud);

}  // namespace bmti
