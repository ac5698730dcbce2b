// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"

#include "bmti/delta_f.hpp"
#include "bmti/error.hpp"
#include "bmti/gradients.hpp"
#include "bmti/intrinsic_dim.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/solver.hpp"
#include "bmti/sparse.hpp"
#include "support.hpp"

using namespace bmti;

namespace {

DeltaFEdgeSet random_edges(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), le(-3.0, 1.0);
  DeltaFEdgeSet e;
  e.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    e.source[a] = rng() % n;
    do e.target[a] = rng() % n;
    while (e.target[a] == e.source[a]);
    e.delta_f[a] = u(rng);
    e.eps2[a] = std::pow(10.0, le(rng));
  }
  return e;
}

Eigen::VectorXd pinv_solve(const SolverSystem& s) {
  const Eigen::MatrixXd a = s.A.to_dense();
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(s.b.data(), static_cast<Eigen::Index>(s.b.size()));
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  return cod.solve(b);
}

}  // namespace

TEST_CASE("sparse matrix merges duplicates and multiplies like its dense form") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<Triplet> t;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::normal_distribution<double> g;
    for (std::size_t c = 0; c < 3 * n; ++c) {
      const std::size_t r = rng() % n, col = rng() % n;
      const double v = g(rng);
      t.push_back({r, col, v});
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) += v;
    }
    SparseMatrix s(n, t);
    CHECK((s.to_dense() - dense).cwiseAbs().maxCoeff() < 1e-13);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = g(rng);
    s.multiply(x, y);
    const Eigen::VectorXd ref = dense * Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) CHECK(y[r] == doctest::Approx(ref[static_cast<Eigen::Index>(r)]).scale(1.0).epsilon(1e-12));
    for (std::size_t r = 0; r < n; ++r) {
      CHECK(s.diagonal()[r] == s.coeff(r, r));
      for (std::size_t c = 1; c < s.row_cols(r).size(); ++c) CHECK(s.row_cols(r)[c - 1] < s.row_cols(r)[c]);
    }
    std::vector<double> d(n, 2.0);
    const auto sd = s.scaled_plus_diagonal(0.5, d);
    const Eigen::MatrixXd expect = 0.5 * dense + 2.0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    CHECK((sd.to_dense() - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS(SparseMatrix(2, {{2, 0, 1.0}}), ParameterError);
}

TEST_CASE("assembled system is a weighted Laplacian") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 80;
    const auto edges = random_edges(rng, n, 1 + rng() % (4 * n));
    const auto s = assemble_system(edges, n);
    const Eigen::MatrixXd a = s.A.to_dense();
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    double bsum = 0.0, babs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      CHECK(std::abs(a.row(ii).sum()) <= 1e-9 * std::max(a(ii, ii), 1e-300));
      CHECK(a(ii, ii) >= 0.0);
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (j != ii) CHECK(a(ii, j) <= 0.0);
      bsum += s.b[i];
      babs += std::abs(s.b[i]);
    }
    CHECK(std::abs(bsum) <= 1e-12 * (1.0 + babs));
    CHECK(s.n_edges == edges.size());
    CHECK(s.component_labels.size() == n);
  }
}

TEST_CASE("CG matches the dense pseudo-inverse solution") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 120;
    const auto edges = random_edges(rng, n, n / 2 + rng() % (3 * n));
    const auto s = assemble_system(edges, n);
    SolveOptions opts;
    opts.tol = 1e-13;
    const auto est = solve_bmti(s, opts);
    const auto ref = pinv_solve(s);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(est.F[i] - ref[static_cast<Eigen::Index>(i)]));
    CHECK(err < 1e-8);
    // zero mean per component
    std::vector<double> sum(s.n_components, 0.0);
    for (std::size_t i = 0; i < n; ++i) sum[s.component_labels[i]] += est.F[i];
    for (double v : sum) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("uncertainties equal the pseudo-inverse diagonal") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto edges = random_edges(rng, n, 1 + rng() % (3 * n));
    const auto s = assemble_system(edges, n);
    const auto var = estimate_uncertainties(s);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(s.A.to_dense());
    cod.setThreshold(1e-10);
    const Eigen::MatrixXd pinv = cod.pseudoInverse();
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(var[i] - pinv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))) <
            1e-8 * (1.0 + std::abs(var[i])));
  }
}

TEST_CASE("two nodes: variance is eps2 / 8") {
  for (double eps2 : {0.25, 1.0, 4.0, 0.3, 7.0, 1e-3}) {
    DeltaFEdgeSet e;
    e.resize(2);
    e.source = {0, 1};
    e.target = {1, 0};
    e.delta_f = {0.7, -0.7};
    e.eps2 = {eps2, eps2};
    const auto s = assemble_system(e, 2);
    const auto var = estimate_uncertainties(s);
    const double expect = eps2 / 8.0;
    CHECK(var[0] == doctest::Approx(expect).epsilon(1e-15));
    CHECK(var[1] == doctest::Approx(expect).epsilon(1e-15));
    if (eps2 == 0.25 || eps2 == 1.0 || eps2 == 4.0) {
      CHECK(var[0] == expect);
      CHECK(var[1] == expect);
    }
    const auto est = solve_bmti(s);
    CHECK(est.F[1] - est.F[0] == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("consistent differences are recovered exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng() % 150;
    auto edges = random_edges(rng, n, 2 * n + rng() % (3 * n));
    std::vector<double> f(n);
    std::normal_distribution<double> g(0.0, 3.0);
    for (auto& v : f) v = g(rng);
    for (std::size_t a = 0; a < edges.size(); ++a) edges.delta_f[a] = f[edges.target[a]] - f[edges.source[a]];
    const auto s = assemble_system(edges, n);
    SolveOptions opts;
    opts.tol = 1e-14;
    const auto est = solve_bmti(s, opts);
    std::vector<double> off(s.n_components, 0.0), cnt(s.n_components, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      off[s.component_labels[i]] += f[i] - est.F[i];
      cnt[s.component_labels[i]] += 1.0;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = s.component_labels[i];
      err = std::max(err, std::abs(est.F[i] + off[c] / cnt[c] - f[i]));
    }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("refinement steps do not lose accuracy on a stiff chain") {
  std::mt19937_64 rng(12);
  const std::size_t n = 300;
  DeltaFEdgeSet e;
  e.resize(n - 1);
  std::vector<double> f(n);
  std::normal_distribution<double> g(0.0, 3.0);
  for (auto& v : f) v = g(rng);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    e.source[i] = i;
    e.target[i] = i + 1;
    e.eps2[i] = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
    e.delta_f[i] = f[i + 1] - f[i];
  }
  const auto s = assemble_system(e, n);
  auto error = [&](const std::vector<double>& x) {
    double off = 0.0, w = 0.0;
    for (std::size_t i = 0; i < n; ++i) off += f[i] - x[i];
    off /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) w = std::max(w, std::abs(x[i] + off - f[i]));
    return w;
  };
  SolveOptions opts;
  opts.max_iter = 100 * n;
  const auto plain = solve_bmti(s, opts);
  opts.refinement_steps = 3;
  const auto refined = solve_bmti(s, opts);
  CHECK(refined.residual <= plain.residual);
  CHECK(error(refined.F) <= error(plain.F));
  CHECK(error(refined.F) < 1e-6);
  CHECK(refined.cg_iterations > plain.cg_iterations);
}

TEST_CASE("regularised solve") {
  std::mt19937_64 rng(3);
  const std::size_t n = 60;
  const auto edges = random_edges(rng, n, 100);
  const auto s = assemble_system(edges, n);
  KnnAnchor anchor;
  anchor.F0.resize(n);
  anchor.h.resize(n);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    anchor.F0[i] = g(rng);
    anchor.h[i] = 4.0 + static_cast<double>(rng() % 20);
  }
  CHECK(solve_regularized(s, anchor, 0.0).F == anchor.F0);
  for (double alpha : {0.2, 0.7, 0.95}) {
    SolveOptions opts;
    opts.tol = 1e-13;
    const auto est = solve_regularized(s, anchor, alpha, opts);
    Eigen::MatrixXd m = alpha * s.A.to_dense();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m(ii, ii) += (1.0 - alpha) * anchor.h[i];
      rhs[ii] = alpha * s.b[i] + (1.0 - alpha) * anchor.h[i] * anchor.F0[i];
    }
    const Eigen::VectorXd ref = m.ldlt().solve(rhs);
    for (std::size_t i = 0; i < n; ++i) CHECK(est.F[i] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).scale(1.0).epsilon(1e-9));
    CHECK(est.alpha == alpha);
  }
  const auto full = solve_regularized(s, anchor, 1.0);
  if (s.n_components > 1) CHECK_FALSE(full.warnings.empty());
  CHECK_THROWS_AS(solve_regularized(s, anchor, 1.5), ParameterError);
  anchor.h[0] = 0.0;
  CHECK_THROWS_AS(solve_regularized(s, anchor, 0.5), ParameterError);
}

TEST_CASE("solver failure modes") {
  std::mt19937_64 rng(5);
  const auto edges = random_edges(rng, 100, 300);
  const auto s = assemble_system(edges, 100);
  SolveOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-14;
  CHECK_THROWS_AS(solve_bmti(s, opts), ConvergenceError);
  CHECK_THROWS_AS(estimate_uncertainties(s, 50), CapabilityError);
  DeltaFEdgeSet empty;
  CHECK_THROWS_AS(assemble_system(empty, 3), StateError);
  CHECK_THROWS_AS(assemble_system(edges, 100, PrecisionMode::optimal_diagonal, nullptr), ParameterError);
  CHECK(parse_precision_mode("optimal_diagonal") == PrecisionMode::optimal_diagonal);
  CHECK(to_string(PrecisionMode::diagonal) == "diagonal");
  CHECK_THROWS_AS(parse_precision_mode("full"), ParameterError);
}

TEST_CASE("optimal diagonal precisions against the dense covariance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    auto c = test::gaussian_cloud(60, 2, rng());
    std::vector<std::size_t> k(60);
    for (auto& v : k) v = 4 + rng() % 8;
    const auto g = build_neighbor_graph(c, k);
    const auto grads = compute_gradient_field(g, c, fixed_id(2.0, 2));
    const auto edges = build_edge_set(g, grads, c);
    const auto w = optimal_diagonal_precisions(edges, g, Exec::serial);
    const std::size_t m = edges.size();
    for (std::size_t a = 0; a < m; ++a) {
      double sum_sq = 0.0;
      for (std::size_t b = 0; b < m; ++b) {
        const double cab = covariance_entry(edges, a, b, g);
        sum_sq += cab * cab;
      }
      const double caa = covariance_entry(edges, a, a, g);
      const double expect = caa > 0.0 && sum_sq > 0.0 ? caa / sum_sq : 1.0 / edges.eps2[a];
      CHECK(w[a] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("kNN anchor") {
  auto c = test::gaussian_cloud(200, 2, 1);
  std::vector<std::size_t> k(200, 10);
  const auto g = build_neighbor_graph(c, k);
  const auto a = knn_anchor(c, g, 2.0);
  for (std::size_t i = 0; i < 200; i += 13) {
    const auto nb = test::brute_neighbors(c, i);
    const double r = nb[9].first;
    CHECK(a.F0[i] == doctest::Approx(-std::log(10.0 / (200.0 * M_PI * r * r))).epsilon(1e-12));
    CHECK(a.h[i] == 10.0);
  }
}
