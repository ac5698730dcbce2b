// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "bmti/baselines.hpp"
#include "bmti/error.hpp"
#include "bmti/evaluation.hpp"
#include "support.hpp"

using namespace bmti;

TEST_CASE("Abramson k") {
  CHECK(abramson_k(2000, 2) == 13);
  CHECK(abramson_k(10000, 6) == 251);
  CHECK(abramson_k(5000, 2) == 17);
  CHECK(abramson_k(10, 2) == 4);
  CHECK(abramson_k(3, 2) == 2);
  CHECK(abramson_k(1000, 40) == 534);
  CHECK_THROWS_AS(abramson_k(1, 2), ParameterError);
}

TEST_CASE("kNN density against brute force") {
  auto c = test::gaussian_cloud(300, 3, 2);
  const auto est = knn_density(c, 3.0, 12);
  CHECK(est.method == "knn");
  CHECK(est.param == 12.0);
  for (std::size_t i = 0; i < 300; i += 11) {
    const double r = test::brute_neighbors(c, i)[11].first;
    const double rho = 12.0 / (300.0 * (4.0 / 3.0) * std::numbers::pi * r * r * r);
    CHECK(est.F[i] == doctest::Approx(-std::log(rho)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(knn_density(c, 3.0, 300), ParameterError);
  std::vector<double> dup{0, 0, 0, 0, 1, 1};
  CHECK_THROWS_AS(knn_density(PointCloud(dup, 2), 2.0, 1), DataError);
}

TEST_CASE("Silverman bandwidth") {
  std::vector<double> x{0, 0, 1, 2, 2, 4, 3, 6};
  PointCloud c(x, 2);
  // per-axis sample std: sqrt(5/3) and 2 sqrt(5/3)
  const double sigma = 1.5 * std::sqrt(5.0 / 3.0);
  CHECK(silverman_bandwidth(c) == doctest::Approx(sigma * std::pow(4.0 / 16.0, 1.0 / 6.0)).epsilon(1e-14));
  std::vector<double> flat(10, 1.0);
  CHECK_THROWS_AS(silverman_bandwidth(PointCloud(flat, 2)), DataError);
}

TEST_CASE("GKDE evaluation matches the direct sum") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng() % 4;
    const std::size_t n = 2 + rng() % 50;
    const auto s = test::gaussian_coords(n, dim, rng());
    const auto q = test::gaussian_coords(1, dim, rng());
    const double h = std::uniform_real_distribution<double>(0.3, 2.0)(rng);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t a = 0; a < dim; ++a) d2 += (q[a] - s[j * dim + a]) * (q[a] - s[j * dim + a]);
      sum += std::exp(-d2 / (2 * h * h)) / std::pow(2 * std::numbers::pi * h * h, 0.5 * static_cast<double>(dim));
    }
    CHECK(gkde_evaluate(s, dim, h, q) == doctest::Approx(-std::log(sum / static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("GKDE stays finite far from the data") {
  std::vector<double> s{0.0, 0.0, 1.0, 0.0};
  std::vector<double> q{1e4, 0.0};
  const double f = gkde_evaluate(s, 2, 0.1, q);
  CHECK(std::isfinite(f));
  // Dominated by the nearest sample at distance 1e4 - 1.
  const double d = 1e4 - 1.0;
  CHECK(f == doctest::Approx(d * d / 0.02 + std::log(2.0) + std::log(2 * std::numbers::pi * 0.01)).epsilon(1e-12));
  CHECK_THROWS_AS(gkde_evaluate(s, 2, 0.0, q), ParameterError);
  CHECK_THROWS_AS(gkde_evaluate(s, 3, 1.0, q), ParameterError);
}

TEST_CASE("GKDE and kNN on a Gaussian sample") {
  auto c = test::gaussian_cloud(4000, 2, 8);
  const auto kde = gkde_density(c);
  CHECK(kde.param == doctest::Approx(silverman_bandwidth(c)));
  const auto knn = knn_density(c, 2.0, abramson_k(4000, 2));
  std::vector<double> truth(c.truth().begin(), c.truth().end());
  CHECK(align_and_mae(kde.F, truth).mae < 0.3);
  CHECK(align_and_mae(knn.F, truth).mae < 0.3);
  // Offsets absorb the Gaussian normaliser log(2 pi).
  CHECK(align_and_mae(knn.F, truth).offset == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(0.05));
}
