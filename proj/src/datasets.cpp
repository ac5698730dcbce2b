// SPDX-License-Identifier: Apache-2.0

#include "bmti/datasets.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bmti/error.hpp"

namespace bmti {

void PeriodicBox::wrap(std::span<double> x) const {
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double len = hi[a] - lo[a];
    x[a] = x[a] - len * std::floor((x[a] - lo[a]) / len);
  }
}

double mueller_brown(double x, double y) {
  const double t1 = 15.0 * std::exp(0.7 * (x + 1) * (x + 1) + 0.6 * (x + 1) * (y - 1) + 0.7 * (y - 1) * (y - 1));
  const double t2 = -200.0 * std::exp(-(x - 1) * (x - 1) - 10.0 * y * y);
  const double t3 = -100.0 * std::exp(-x * x - 10.0 * (y - 0.5) * (y - 0.5));
  const double t4 = -170.0 * std::exp(-6.5 * (x + 0.5) * (x + 0.5) + 11.0 * (x + 0.5) * (y - 1.5) -
                                      6.5 * (y - 1.5) * (y - 1.5));
  return t1 + t2 + t3 + t4;
}

namespace {

Potential gauss2d(const PotentialParams& params) {
  Eigen::Matrix2d sigma;
  sigma << 1.0, 0.4, 0.4, 0.2;
  if (params.sigma) sigma = *params.sigma;
  if (!sigma.isApprox(sigma.transpose()) || sigma.llt().info() != Eigen::Success)
    throw ParameterError("gauss2d: covariance must be symmetric positive definite");
  const Eigen::Matrix2d prec = sigma.inverse();
  Potential p;
  p.name = "gauss2d";
  p.dim = 2;
  p.beta = params.beta.value_or(1.0);
  p.energy = [prec](std::span<const double> x) {
    const Eigen::Vector2d v(x[0], x[1]);
    return 0.5 * v.dot(prec * v);
  };
  p.start = {0.0, 0.0};
  return p;
}

Potential mb2d(const PotentialParams& params) {
  Potential p;
  p.name = "mb2d";
  p.dim = 2;
  p.beta = params.beta.value_or(kMuellerBrownBeta);
  p.energy = [](std::span<const double> x) { return mueller_brown(x[0], x[1]); };
  p.start = {-0.558, 1.442};
  return p;
}

Potential sixd(const PotentialParams& params) {
  Potential p;
  p.name = "sixd";
  p.dim = 6;
  p.beta = params.beta.value_or(1.0);
  p.energy = [](std::span<const double> x) {
    const double a = 2.0 * std::exp(-(x[0] - 1.5) * (x[0] - 1.5) - (x[1] - 2.5) * (x[1] - 2.5));
    const double b = 3.0 * std::exp(-2.0 * x[0] * x[0] - 0.25 * x[1] * x[1]);
    double u = -3.0 * std::log(a + b);
    for (std::size_t k = 2; k < 6; ++k) u += 0.5 * x[k] * x[k];
    return u;
  };
  p.start = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  return p;
}

Potential glassy2d(const PotentialParams& params) {
  constexpr double kLx = 8.0, kLy = 4.0;
  constexpr double kVar = 0.04;
  constexpr std::size_t kCentres = 90;
  const double pi = std::numbers::pi;
  // Exact normaliser of the three-peak bracket on the plane.
  const double mp_norm = 1.0 / (3.4 * pi / std::sqrt(12.0) + 6.0 * pi / std::sqrt(10.0));

  std::mt19937_64 rng(params.glassy_seed);
  std::uniform_real_distribution<double> ux(-3.6, 3.6), uy(-1.8, 1.8);
  std::vector<double> centres(2 * kCentres);
  for (std::size_t c = 0; c < kCentres; ++c) {
    centres[2 * c] = ux(rng);
    centres[2 * c + 1] = uy(rng);
  }
  auto mp = [](double x, double y) {
    return 3.4 * std::exp(-6.5 * (x + 1) * (x + 1) + 11.0 * (x + 1) * (y - 0.5) - 6.5 * (y - 0.5) * (y - 0.5)) +
           2.0 * std::exp(-(x + 0.5) * (x + 0.5) - 10.0 * (y + 0.5) * (y + 0.5)) +
           4.0 * std::exp(-(x - 0.5) * (x - 0.5) - 10.0 * (y + 1) * (y + 1));
  };
  Potential p;
  p.name = "glassy2d";
  p.dim = 2;
  p.beta = params.beta.value_or(1.0);
  p.box = PeriodicBox{{-4.0, -2.0}, {4.0, 2.0}};
  p.energy = [centres, mp, mp_norm, pi](std::span<const double> x) {
    double peaks = 0.0, gauss = 0.0;
    for (int ix = -1; ix <= 1; ++ix)
      for (int iy = -1; iy <= 1; ++iy) {
        const double xx = x[0] + ix * kLx;
        const double yy = x[1] + iy * kLy;
        peaks += mp(xx, yy);
        for (std::size_t c = 0; c < kCentres; ++c) {
          const double dx = xx - centres[2 * c];
          const double dy = yy - centres[2 * c + 1];
          gauss += std::exp(-(dx * dx + dy * dy) / (2.0 * kVar));
        }
      }
    const double rho = 0.6 * mp_norm * peaks +
                       (0.18 / static_cast<double>(kCentres)) * gauss / (2.0 * pi * kVar) +
                       0.22 / (kLx * kLy);
    return -std::log(rho);
  };
  p.start = {0.0, 0.0};
  return p;
}

}  // namespace

Potential make_potential(const std::string& name, const PotentialParams& params) {
  if (params.beta && !(*params.beta > 0.0)) throw ParameterError("make_potential: beta must be positive");
  if (name == "gauss2d") return gauss2d(params);
  if (name == "mb2d") return mb2d(params);
  if (name == "sixd") return sixd(params);
  if (name == "glassy2d") return glassy2d(params);
  throw ParameterError("make_potential: unknown potential '" + name + "'");
}

McmcResult sample_mcmc(const Potential& potential, const McmcOptions& opts) {
  if (opts.n < 2) throw ParameterError("sample_mcmc: n must be >= 2");
  if (opts.thinning < 1) throw ParameterError("sample_mcmc: thinning must be >= 1");
  if (!(opts.step > 0.0)) throw ParameterError("sample_mcmc: step must be positive");
  if (!(potential.beta > 0.0)) throw ParameterError("sample_mcmc: beta must be positive");
  if (opts.n > (opts.max_steps - std::min(opts.burn_in, opts.max_steps)) / opts.thinning)
    throw ParameterError("sample_mcmc: n * thinning + burn_in exceeds max_steps");
  const std::size_t dim = potential.dim;
  if (potential.start.size() != dim) throw ParameterError("sample_mcmc: start point has wrong dimension");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> x = potential.start, y(dim);
  double u = potential.reduced(x);
  if (!std::isfinite(u)) throw ParameterError("sample_mcmc: potential is not finite at the start point");
  double step = opts.step;

  auto propose = [&]() -> bool {
    for (std::size_t a = 0; a < dim; ++a) y[a] = x[a] + step * normal(rng);
    if (potential.box) potential.box->wrap(y);
    const double uy = potential.reduced(y);
    const double log_accept = u - uy;
    if (std::isfinite(uy) && (log_accept >= 0.0 || unit(rng) < std::exp(log_accept))) {
      x.swap(y);
      u = uy;
      return true;
    }
    return false;
  };

  constexpr std::size_t kWindow = 100;
  std::size_t window_accepts = 0;
  for (std::size_t s = 0; s < opts.burn_in; ++s) {
    window_accepts += propose() ? 1 : 0;
    if (opts.tune && (s + 1) % kWindow == 0) {
      const double rate = static_cast<double>(window_accepts) / kWindow;
      step *= std::exp(rate - opts.target_acceptance);
      window_accepts = 0;
    }
  }

  std::vector<double> coords;
  coords.reserve(opts.n * dim);
  std::vector<double> truth;
  truth.reserve(opts.n);
  std::size_t accepted = 0;
  for (std::size_t s = 0; s < opts.n; ++s) {
    for (std::size_t t = 0; t < opts.thinning; ++t) accepted += propose() ? 1 : 0;
    coords.insert(coords.end(), x.begin(), x.end());
    truth.push_back(u);
  }

  McmcResult r{PointCloud(std::move(coords), dim, std::move(truth)), 0.0, step, {}};
  r.acceptance = static_cast<double>(accepted) / static_cast<double>(opts.n * opts.thinning);
  if (r.acceptance < 0.1 || r.acceptance > 0.9)
    r.warnings.push_back("acceptance rate " + std::to_string(r.acceptance) + " outside [0.1, 0.9]");
  return r;
}

Eigen::MatrixXd random_rotation(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ParameterError("random_rotation: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < d; ++c)
    if (rr(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

PointCloud swiss_roll_embed(const PointCloud& cloud, const EmbeddingSpec& spec) {
  const std::size_t dim = cloud.dim();
  if (dim + 1 > spec.target_dim) throw ParameterError("swiss_roll_embed: target_dim must be >= D + 1");
  const auto t = static_cast<Eigen::Index>(spec.target_dim);
  const Eigen::MatrixXd q = random_rotation(spec.target_dim, spec.rotation_seed);
  std::vector<double> out(cloud.size() * spec.target_dim);
  Eigen::VectorXd v(t);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    v.setZero();
    v[0] = p[0] * std::cos(p[0]);
    v[1] = p[0] * std::sin(p[0]);
    for (std::size_t a = 1; a < dim; ++a) v[static_cast<Eigen::Index>(a + 1)] = p[a];
    Eigen::Map<Eigen::VectorXd>(out.data() + i * spec.target_dim, t) = q * v;
  }
  if (cloud.has_truth()) {
    const auto tr = cloud.truth();
    return PointCloud(std::move(out), spec.target_dim, std::vector<double>(tr.begin(), tr.end()));
  }
  return PointCloud(std::move(out), spec.target_dim);
}

std::vector<std::string> dataset_names() { return {"gauss2d", "mb2d", "sixd", "glassy2d", "mb2d-20d"}; }

GeneratedDataset generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed,
                                  std::optional<double> beta, const PotentialParams& params) {
  if (n < 2) throw ParameterError("generate_dataset: n must be >= 2");
  PotentialParams pp = params;
  if (beta) pp.beta = beta;
  const bool embed = name == "mb2d-20d";
  const Potential pot = make_potential(embed ? "mb2d" : name, pp);

  McmcOptions opts;
  opts.n = n;
  opts.seed = seed;
  auto mc = sample_mcmc(pot, opts);
  GeneratedDataset out{std::move(mc.cloud), name, pot.beta, mc.acceptance, std::move(mc.warnings)};
  if (embed) out.cloud = swiss_roll_embed(out.cloud, {20, seed ^ 0x9e3779b97f4a7c15ULL});
  return out;
}

}  // namespace bmti
