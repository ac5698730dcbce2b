// SPDX-License-Identifier: Apache-2.0

#include "bmti/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "bmti/error.hpp"

namespace bmti {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

BmtiResult run_bmti(const PointCloud& cloud, const EstimatorParams& params) {
  if (params.uncertainties && params.alpha != 1.0)
    throw ParameterError("uncertainties are only defined for the unregularised solve (alpha = 1)");
  BmtiResult r;
  Stopwatch sw;
  const KnnTable table = adaptive_knn_table(cloud, params.adaptive, params.exec);
  r.seconds["knn"] = sw.lap();
  r.id = params.id ? fixed_id(*params.id, cloud.dim())
                   : estimate_id_twonn(table, cloud.dim(), params.discard_fraction);
  const auto k = select_adaptive_k(table, r.id, params.adaptive, params.exec);
  r.graph = build_neighbor_graph(cloud, k, &table, params.exec);
  r.seconds["graph"] = sw.lap();
  r.gradients = compute_gradient_field(r.graph, cloud, r.id, params.exec);
  r.seconds["gradients"] = sw.lap();
  r.edges = build_edge_set(r.graph, r.gradients, cloud, params.eps2_min, params.exec);
  r.seconds["edges"] = sw.lap();
  r.system = assemble_system(r.edges, cloud.size(), params.precision_mode, &r.graph, params.exec);
  r.seconds["assembly"] = sw.lap();

  SolveOptions so;
  so.tol = params.cg_tol;
  so.max_iter = params.cg_max_iter;
  so.exec = params.exec;
  const KnnAnchor anchor = params.alpha == 1.0 ? KnnAnchor{} : knn_anchor(cloud, r.graph, r.id.d);
  r.estimate = solve_regularized(r.system, anchor, params.alpha, so);
  r.seconds["solve"] = sw.lap();
  if (params.uncertainties) {
    r.estimate.var_F = estimate_uncertainties(r.system);
    r.seconds["uncertainties"] = sw.lap();
  }
  return r;
}

MethodResult estimate_method(const PointCloud& cloud, const std::string& method,
                             const EstimatorParams& params) {
  MethodResult out;
  out.method = method;
  if (method == "bmti") {
    auto r = run_bmti(cloud, params);
    out.F = std::move(r.estimate.F);
    if (r.estimate.var_F) {
      std::vector<double> s(r.estimate.var_F->size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max((*r.estimate.var_F)[i], 0.0));
      out.sigma_F = std::move(s);
    }
    out.k = std::vector<std::size_t>(r.graph.ks().begin(), r.graph.ks().end());
    out.d_used = r.id.d;
    out.param = params.alpha;
    out.warnings = std::move(r.estimate.warnings);
    return out;
  }
  if (method == "knn") {
    double d = static_cast<double>(cloud.dim());
    if (params.knn_volume_dim == VolumeDim::intrinsic)
      d = params.id ? fixed_id(*params.id, cloud.dim()).d
                    : estimate_id_twonn(cloud, params.discard_fraction, params.exec).d;
    const std::size_t k = params.knn_k ? *params.knn_k : abramson_k(cloud.size(), cloud.dim(), params.adaptive.k_min);
    auto b = knn_density(cloud, d, k, params.exec);
    out.F = std::move(b.F);
    out.d_used = d;
    out.param = b.param;
    return out;
  }
  if (method == "gkde") {
    auto b = gkde_density(cloud, params.bandwidth, params.exec);
    out.F = std::move(b.F);
    out.d_used = static_cast<double>(cloud.dim());
    out.param = b.param;
    return out;
  }
  throw ParameterError("unknown method '" + method + "' (expected bmti, knn or gkde)");
}

}  // namespace bmti
