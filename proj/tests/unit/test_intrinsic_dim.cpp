// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"

#include "bmti/error.hpp"
#include "bmti/intrinsic_dim.hpp"
#include "bmti/knn.hpp"
#include "support.hpp"

using namespace bmti;

TEST_CASE("TwoNN on a uniform square") {
  PointCloud c(test::uniform_coords(5000, 2, 3), 2);
  const auto id = estimate_id_twonn(c);
  CHECK(id.d > 1.9);
  CHECK(id.d < 2.1);
  CHECK(id.method == "twonn");
  CHECK(id.n_skipped == 0);
}

TEST_CASE("TwoNN finds a plane embedded in five dimensions") {
  const std::size_t n = 4000;
  auto flat = test::uniform_coords(n, 2, 8);
  std::vector<double> x(n * 5, 0.0);
  std::mt19937_64 rng(5);
  const auto q = test::haar_rotation(5, rng);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
    p[0] = flat[2 * i];
    p[1] = flat[2 * i + 1];
    Eigen::VectorXd y = q * p;
    for (int a = 0; a < 5; ++a) x[i * 5 + static_cast<std::size_t>(a)] = y[a];
  }
  const auto id = estimate_id_twonn(PointCloud(std::move(x), 5));
  CHECK(id.d == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("TwoNN without discarding is the Pareto MLE") {
  auto c = test::gaussian_cloud(300, 3, 21);
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto nb = test::brute_neighbors(c, i);
    sum += std::log(nb[1].first / nb[0].first);
  }
  const auto id = estimate_id_twonn(c, 0.0);
  CHECK(id.d == doctest::Approx(300.0 / sum).epsilon(1e-12));
  CHECK(id.n_used == 300);
}

TEST_CASE("TwoNN is invariant under power-of-two rescaling (bitwise)") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng() % 8;
    const std::size_t n = 30 + rng() % 300;
    auto x = test::gaussian_coords(n, dim, rng());
    const int e = static_cast<int>(rng() % 21) - 10;
    auto y = x;
    for (auto& v : y) v = std::ldexp(v, e);
    const double discard = (trial % 2 == 0) ? 0.1 : 0.0;
    const auto a = estimate_id_twonn(PointCloud(std::move(x), dim), discard);
    const auto b = estimate_id_twonn(PointCloud(std::move(y), dim), discard);
    CHECK(a.d == b.d);
    CHECK(a.n_used == b.n_used);
  }
}

TEST_CASE("TwoNN clamps to the embedding dimension and handles duplicates") {
  // Points on a line in 1-d: estimate cannot exceed D = 1.
  auto c = PointCloud(test::uniform_coords(200, 1, 4), 1);
  CHECK(estimate_id_twonn(c).d <= 1.0);

  auto x = test::gaussian_coords(50, 2, 9);
  for (std::size_t a = 0; a < 2; ++a) x[2 + a] = x[a];
  const auto id = estimate_id_twonn(PointCloud(std::move(x), 2));
  CHECK(id.n_skipped == 2);

  std::vector<double> same(40, 1.0);
  CHECK_THROWS_AS(estimate_id_twonn(PointCloud(std::move(same), 2)), DataError);
}

TEST_CASE("TwoNN argument checks") {
  auto small = test::gaussian_cloud(9, 2, 1);
  CHECK_THROWS_AS(estimate_id_twonn(small), ParameterError);
  auto c = test::gaussian_cloud(50, 2, 1);
  CHECK_THROWS_AS(estimate_id_twonn(c, 1.0), ParameterError);
  CHECK_THROWS_AS(estimate_id_twonn(c, -0.1), ParameterError);
  CHECK_THROWS_AS(estimate_id_twonn(all_knn(c, 1), 2), ParameterError);
}

TEST_CASE("fixed intrinsic dimension") {
  CHECK(fixed_id(2.5, 3).d == 2.5);
  CHECK_THROWS_AS(fixed_id(0.0, 3), ParameterError);
  CHECK_THROWS_AS(fixed_id(4.0, 3), ParameterError);
}
