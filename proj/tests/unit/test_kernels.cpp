// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include <algorithm>
#include <random>

#include "doctest.h"

#include "bmti/baselines.hpp"
#include "bmti/delta_f.hpp"
#include "bmti/gradients.hpp"
#include "bmti/intrinsic_dim.hpp"
#include "bmti/knn.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/parallel.hpp"
#include "bmti/pipeline.hpp"
#include "bmti/solver.hpp"
#include "support.hpp"

using namespace bmti;

namespace {

// Oversubscribe so the parallel path really interleaves, even on one core.
struct ThreadScope {
  int saved = omp_get_max_threads();
  ThreadScope() { omp_set_num_threads(4); }
  ~ThreadScope() { omp_set_num_threads(saved); }
};

template <class A, class B>
bool same(const A& a, const B& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

TEST_CASE("for_each_index covers every index and rethrows") {
  ThreadScope scope;
  std::vector<int> hits(1000, 0);
  for_each_index(hits.size(), Exec::parallel, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(for_each_index(100, Exec::parallel,
                                 [](std::size_t i) {
                                   if (i == 57) throw std::runtime_error("x");
                                 }),
                  std::runtime_error);
  CHECK(max_threads() >= 1);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  ThreadScope scope;
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(trial);
    auto c = test::gaussian_cloud(1500, dim, rng());

    const auto ts = all_knn(c, 40, Exec::serial);
    const auto tp = all_knn(c, 40, Exec::parallel);
    CHECK(ts.indices == tp.indices);
    CHECK(ts.distances == tp.distances);

    const auto id = estimate_id_twonn(ts, dim);
    AdaptiveKOptions opts;
    opts.k_max = 40;
    const auto ks = select_adaptive_k(ts, id, opts, Exec::serial);
    const auto kp = select_adaptive_k(ts, id, opts, Exec::parallel);
    CHECK(ks == kp);

    const auto gs = build_neighbor_graph(c, ks, &ts, Exec::serial);
    const auto gp = build_neighbor_graph(c, ks, &ts, Exec::parallel);
    for (std::size_t e = 0; e < gs.n_edges(); ++e) CHECK(gs.edge_overlap(e) == gp.edge_overlap(e));

    const auto fs = compute_gradient_field(gs, c, id, Exec::serial);
    const auto fp = compute_gradient_field(gs, c, id, Exec::parallel);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(fs.g(i) == fp.g(i));
      CHECK(fs.var(i) == fp.var(i));
    }

    const auto es = build_edge_set(gs, fs, c, kDefaultEps2Min, Exec::serial);
    const auto ep = build_edge_set(gs, fs, c, kDefaultEps2Min, Exec::parallel);
    CHECK(es.delta_f == ep.delta_f);
    CHECK(es.eps2 == ep.eps2);

    const auto sys = assemble_system(es, c.size());
    std::vector<double> x(c.size()), ys(c.size()), yp(c.size());
    std::normal_distribution<double> g;
    for (auto& v : x) v = g(rng);
    sys.A.multiply(x, ys, Exec::serial);
    sys.A.multiply(x, yp, Exec::parallel);
    CHECK(ys == yp);

    SolveOptions so;
    so.exec = Exec::serial;
    const auto ss = solve_bmti(sys, so);
    so.exec = Exec::parallel;
    const auto sp = solve_bmti(sys, so);
    CHECK(ss.F == sp.F);
    CHECK(ss.cg_iterations == sp.cg_iterations);

    const auto ks_ = gkde_density(c, std::nullopt, Exec::serial);
    const auto kp_ = gkde_density(c, std::nullopt, Exec::parallel);
    CHECK(ks_.F == kp_.F);
    CHECK(knn_density(c, 2.0, 10, Exec::serial).F == knn_density(c, 2.0, 10, Exec::parallel).F);
  }
}

TEST_CASE("optimal diagonal precisions are independent of the execution mode") {
  ThreadScope scope;
  auto c = test::gaussian_cloud(300, 2, 4);
  EstimatorParams p;
  p.adaptive.k_max = 24;
  const auto r = run_bmti(c, p);
  const auto ws = optimal_diagonal_precisions(r.edges, r.graph, Exec::serial);
  const auto wp = optimal_diagonal_precisions(r.edges, r.graph, Exec::parallel);
  CHECK(ws == wp);
}

TEST_CASE("whole pipeline is independent of the execution mode") {
  ThreadScope scope;
  auto c = test::gaussian_cloud(2000, 3, 9);
  EstimatorParams p;
  p.exec = Exec::serial;
  const auto a = run_bmti(c, p);
  p.exec = Exec::parallel;
  const auto b = run_bmti(c, p);
  CHECK(a.estimate.F == b.estimate.F);
  CHECK(same(a.graph.ks(), b.graph.ks()));
}
