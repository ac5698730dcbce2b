// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bmti/point_cloud.hpp"

namespace bmti::test {

inline std::vector<double> gaussian_coords(std::size_t n, std::size_t dim, std::uint64_t seed,
                                           double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n * dim);
  for (auto& v : x) v = g(rng);
  return x;
}

inline std::vector<double> uniform_coords(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n * dim);
  for (auto& v : x) v = u(rng);
  return x;
}

inline PointCloud gaussian_cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
  auto x = gaussian_coords(n, dim, seed);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a) s += x[i * dim + a] * x[i * dim + a];
    f[i] = 0.5 * s;
  }
  return PointCloud(std::move(x), dim, std::move(f));
}

// (distance, index) ordered brute force neighbours of i.
inline std::vector<std::pair<double, std::size_t>> brute_neighbors(const PointCloud& c, std::size_t i) {
  std::vector<std::pair<double, std::size_t>> out;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    double s = 0.0;
    for (std::size_t a = 0; a < c.dim(); ++a) {
      const double d = c.point(i)[a] - c.point(j)[a];
      s += d * d;
    }
    out.emplace_back(s, j);
  }
  std::sort(out.begin(), out.end());
  for (auto& p : out) p.first = std::sqrt(p.first);
  return out;
}

inline Eigen::MatrixXd haar_rotation(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

inline PointCloud transformed(const PointCloud& c, const Eigen::MatrixXd& q, const Eigen::VectorXd& t) {
  std::vector<double> x(c.size() * c.dim());
  for (std::size_t i = 0; i < c.size(); ++i) {
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(c.point(i).data(), static_cast<Eigen::Index>(c.dim()));
    Eigen::VectorXd y = q * p + t;
    for (std::size_t a = 0; a < c.dim(); ++a) x[i * c.dim() + a] = y[static_cast<Eigen::Index>(a)];
  }
  return PointCloud(std::move(x), c.dim());
}

}  // namespace bmti::test
