// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bmti/point_cloud.hpp"

namespace bmti {

/// Axis-aligned periodic box [lo, hi).
struct PeriodicBox {
  std::vector<double> lo;
  std::vector<double> hi;

  void wrap(std::span<double> x) const;
};

/// Target density proportional to exp(-beta U(x)).
struct Potential {
  std::string name;
  std::size_t dim = 0;
  double beta = 1.0;
  std::function<double(std::span<const double>)> energy;
  std::optional<PeriodicBox> box;
  std::vector<double> start;

  double reduced(std::span<const double> x) const { return beta * energy(x); }
};

/// Four-term Mueller-Brown surface.
double mueller_brown(double x, double y);

inline constexpr double kMuellerBrownBeta = 0.035;
inline constexpr std::uint64_t kGlassyCentreSeed = 20240607;

struct PotentialParams {
  /// Covariance for gauss2d; defaults to [[1, 0.4], [0.4, 0.2]].
  std::optional<Eigen::Matrix2d> sigma;
  /// Defaults: 0.035 for mb2d, 1 otherwise.
  std::optional<double> beta;
  /// Seed for the 90 glassy2d Gaussian centres.
  std::uint64_t glassy_seed = kGlassyCentreSeed;
};

/// gauss2d, mb2d, sixd or glassy2d.
Potential make_potential(const std::string& name, const PotentialParams& params = {});

struct McmcOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  /// Initial proposal standard deviation; tuned during burn-in when `tune` is set.
  double step = 0.1;
  std::size_t burn_in = 20000;
  std::size_t thinning = 50;
  bool tune = true;
  double target_acceptance = 0.4;
  /// Upper bound on burn_in + n * thinning.
  std::size_t max_steps = 2'000'000'000;
};

struct McmcResult {
  PointCloud cloud;
  double acceptance = 0.0;
  double step = 0.0;
  std::vector<std::string> warnings;
};

/// Metropolis random walk with isotropic Gaussian proposals. truth_F = beta U.
McmcResult sample_mcmc(const Potential& potential, const McmcOptions& opts);

struct EmbeddingSpec {
  std::size_t target_dim = 20;
  std::uint64_t rotation_seed = 0;
};

/// Haar-distributed orthogonal matrix from the QR of a Gaussian matrix.
Eigen::MatrixXd random_rotation(std::size_t dim, std::uint64_t seed);

/// (x0, x1, ...) -> (x0 cos x0, x0 sin x0, x1, ...), zero-padded to
/// target_dim and rotated. truth_F is carried over unchanged.
PointCloud swiss_roll_embed(const PointCloud& cloud, const EmbeddingSpec& spec);

struct GeneratedDataset {
  PointCloud cloud;
  std::string name;
  double beta = 1.0;
  double acceptance = 0.0;
  std::vector<std::string> warnings;
};

std::vector<std::string> dataset_names();

/// gauss2d, mb2d, sixd, glassy2d or mb2d-20d, sampled with default MCMC settings.
GeneratedDataset generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed,
                                  std::optional<double> beta = std::nullopt,
                                  const PotentialParams& params = {});

}  // namespace bmti
