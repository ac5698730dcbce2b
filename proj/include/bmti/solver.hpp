// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmti/delta_f.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/parallel.hpp"
#include "bmti/sparse.hpp"

namespace bmti {

enum class PrecisionMode { diagonal, optimal_diagonal };

PrecisionMode parse_precision_mode(const std::string& name);
std::string to_string(PrecisionMode mode);

/// A F = b with A the positive-semidefinite weighted graph Laplacian (the
/// negated likelihood Hessian) and b the matching weighted divergence.
struct SolverSystem {
  SparseMatrix A;
  std::vector<double> b;
  std::size_t n_edges = 0;
  std::vector<std::size_t> component_labels;
  std::size_t n_components = 0;

  std::size_t size() const noexcept { return b.size(); }
};

struct LogDensityEstimate {
  std::vector<double> F;
  std::optional<std::vector<double>> var_F;
  std::string method;
  double alpha = 1.0;
  std::size_t cg_iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

struct SolveOptions {
  double tol = 1e-8;
  /// 0 selects 10 N.
  std::size_t max_iter = 0;
  bool jacobi = true;
  /// Extra CG restarts on the true residual b - A F.
  std::size_t refinement_steps = 0;
  Exec exec = Exec::parallel;
};

/// 1 / eps2 per edge.
std::vector<double> diagonal_precisions(const DeltaFEdgeSet& edges);

/// d_a = C_aa / sum_b C_ab^2 with C built from covariance_entry over every
/// edge pair whose endpoint neighbourhoods overlap.
std::vector<double> optimal_diagonal_precisions(const DeltaFEdgeSet& edges,
                                                const NeighborGraph& graph,
                                                Exec exec = Exec::parallel);

/// Assembles the system from per-edge weights.
SolverSystem assemble_system(const DeltaFEdgeSet& edges, std::size_t n,
                             std::span<const double> weights);

/// Computes weights for `mode` and assembles. optimal_diagonal needs `graph`.
SolverSystem assemble_system(const DeltaFEdgeSet& edges, std::size_t n,
                             PrecisionMode mode = PrecisionMode::diagonal,
                             const NeighborGraph* graph = nullptr, Exec exec = Exec::parallel);

/// Projected, Jacobi-preconditioned conjugate gradient on A F = b. The
/// constant vector of every component is projected out; F has zero mean per
/// component. Throws ConvergenceError past max_iter and NumericalError on NaN.
LogDensityEstimate solve_bmti(const SolverSystem& system, const SolveOptions& opts = {});

inline constexpr std::size_t kUncertaintyCap = 2000;

/// Diagonal of the Moore-Penrose pseudo-inverse of A, per component.
/// Throws CapabilityError above `cap` points.
std::vector<double> estimate_uncertainties(const SolverSystem& system,
                                           std::size_t cap = kUncertaintyCap);

/// kNN anchor F0_i with curvature h_i for the regularised solve.
struct KnnAnchor {
  std::vector<double> F0;
  std::vector<double> h;
};

/// F0_i = -log(k_i / (N omega_d r^d)) with r the distance to the k_i-th
/// neighbour, and h_i = k_i.
KnnAnchor knn_anchor(const PointCloud& cloud, const NeighborGraph& graph, double d);

/// Solves (alpha A + (1 - alpha) diag(h)) F = alpha b + (1 - alpha) h F0.
/// alpha = 0 returns F0; alpha = 1 is solve_bmti, with a warning when the
/// graph has more than one component; the anchor is not read in that case.
LogDensityEstimate solve_regularized(const SolverSystem& system, const KnnAnchor& anchor,
                                     double alpha, const SolveOptions& opts = {});

}  // namespace bmti
