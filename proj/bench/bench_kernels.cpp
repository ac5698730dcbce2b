// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP for the hot kernels. Arg(0) = serial, Arg(1) = parallel.
#include <benchmark/benchmark.h>

#include <random>

#include "bmti/baselines.hpp"
#include "bmti/delta_f.hpp"
#include "bmti/gradients.hpp"
#include "bmti/intrinsic_dim.hpp"
#include "bmti/knn.hpp"
#include "bmti/neighborhoods.hpp"
#include "bmti/pipeline.hpp"
#include "bmti/solver.hpp"

namespace {

using namespace bmti;

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

PointCloud cloud(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(n * dim);
  for (auto& v : x) v = g(rng);
  return PointCloud(std::move(x), dim);
}

struct Prepared {
  PointCloud cloud;
  IntrinsicDim id;
  NeighborGraph graph;
  GradientField grads;
  DeltaFEdgeSet edges;
  SolverSystem system;
};

const Prepared& prepared() {
  static const Prepared p = [] {
    auto c = cloud(10000, 6);
    EstimatorParams params;
    params.exec = Exec::serial;
    auto r = run_bmti(c, params);
    return Prepared{std::move(c), r.id, std::move(r.graph), std::move(r.gradients), std::move(r.edges),
                    std::move(r.system)};
  }();
  return p;
}

void BM_AllKnn(benchmark::State& s) {
  const auto& p = prepared();
  for (auto _ : s) benchmark::DoNotOptimize(all_knn(p.cloud, 64, exec_of(s)));
}

void BM_AdaptiveK(benchmark::State& s) {
  const auto& p = prepared();
  const auto table = all_knn(p.cloud, 256, Exec::serial);
  for (auto _ : s) benchmark::DoNotOptimize(select_adaptive_k(table, p.id, {}, exec_of(s)));
}

void BM_Gradients(benchmark::State& s) {
  const auto& p = prepared();
  for (auto _ : s) benchmark::DoNotOptimize(compute_gradient_field(p.graph, p.cloud, p.id, exec_of(s)));
}

void BM_EdgeSet(benchmark::State& s) {
  const auto& p = prepared();
  for (auto _ : s) benchmark::DoNotOptimize(build_edge_set(p.graph, p.grads, p.cloud, kDefaultEps2Min, exec_of(s)));
}

void BM_SpMV(benchmark::State& s) {
  const auto& p = prepared();
  std::vector<double> x(p.system.size(), 1.0), y(p.system.size());
  for (auto _ : s) {
    p.system.A.multiply(x, y, exec_of(s));
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_Solve(benchmark::State& s) {
  const auto& p = prepared();
  SolveOptions o;
  o.exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(solve_bmti(p.system, o));
}

void BM_Gkde(benchmark::State& s) {
  const auto c = cloud(3000, 6);
  for (auto _ : s) benchmark::DoNotOptimize(gkde_density(c, std::nullopt, exec_of(s)));
}

}  // namespace

BENCHMARK(BM_AllKnn)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdaptiveK)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradients)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EdgeSet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpMV)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Solve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gkde)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
