// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmti/baselines.hpp"
#include "bmti/delta_f.hpp"
#include "bmti/gradients.hpp"
#include "bmti/intrinsic_dim.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/solver.hpp"

namespace bmti {

enum class VolumeDim { intrinsic, embedding };

/// Estimator settings shared by the CLI, the benchmark runner and the library.
struct EstimatorParams {
  AdaptiveKOptions adaptive;
  /// Fixed intrinsic dimension; TwoNN when empty.
  std::optional<double> id;
  double discard_fraction = 0.1;
  double eps2_min = kDefaultEps2Min;
  double alpha = 1.0;
  PrecisionMode precision_mode = PrecisionMode::diagonal;
  double cg_tol = 1e-8;
  /// 0 selects 10 N.
  std::size_t cg_max_iter = 0;
  bool uncertainties = false;
  /// knn baseline: k (Abramson when empty) and the dimension used for volumes.
  std::optional<std::size_t> knn_k;
  VolumeDim knn_volume_dim = VolumeDim::embedding;
  /// gkde baseline bandwidth (Silverman when empty).
  std::optional<double> bandwidth;
  Exec exec = Exec::parallel;
};

struct BmtiResult {
  IntrinsicDim id;
  NeighborGraph graph;
  GradientField gradients;
  DeltaFEdgeSet edges;
  SolverSystem system;
  LogDensityEstimate estimate;
  std::map<std::string, double> seconds;
};

/// ID, adaptive k, graph, gradients, edges, assembly and solve.
BmtiResult run_bmti(const PointCloud& cloud, const EstimatorParams& params = {});

struct MethodResult {
  std::string method;
  std::vector<double> F;
  std::optional<std::vector<double>> sigma_F;
  std::optional<std::vector<std::size_t>> k;
  double d_used = 0.0;
  double param = 0.0;
  std::vector<std::string> warnings;
};

/// Runs "bmti", "knn" or "gkde".
MethodResult estimate_method(const PointCloud& cloud, const std::string& method,
                             const EstimatorParams& params = {});

}  // namespace bmti
