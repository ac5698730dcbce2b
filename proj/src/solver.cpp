// SPDX-License-Identifier: Apache-2.0

#include "bmti/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "bmti/error.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class ComponentProjector {
 public:
  ComponentProjector(std::span<const std::size_t> labels, std::size_t count)
      : labels_(labels), sums_(count), sizes_(count, 0.0) {
    for (std::size_t l : labels) sizes_[l] += 1.0;
  }

  void apply(std::span<double> v) {
    std::fill(sums_.begin(), sums_.end(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) sums_[labels_[i]] += v[i];
    for (std::size_t c = 0; c < sums_.size(); ++c) sums_[c] /= sizes_[c];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= sums_[labels_[i]];
  }

 private:
  std::span<const std::size_t> labels_;
  std::vector<double> sums_;
  std::vector<double> sizes_;
};

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Preconditioned CG. With a projector the iterates stay in the complement of
// the per-component constants, where a Laplacian is positive definite.
CgResult conjugate_gradient(const SparseMatrix& A, std::span<const double> rhs,
                            ComponentProjector* projector, const SolveOptions& opts) {
  const std::size_t n = A.rows();
  const std::size_t max_iter = opts.max_iter == 0 ? 10 * n : opts.max_iter;
  if (!(opts.tol > 0.0)) throw ParameterError("solve: tol must be positive");

  std::vector<double> inv_diag(n, 1.0);
  if (opts.jacobi) {
    const auto d = A.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
  }

  std::vector<double> b(rhs.begin(), rhs.end());
  if (projector) projector->apply(b);
  const double b_norm = std::sqrt(dot(b, b));

  CgResult out;
  out.x.assign(n, 0.0);
  if (b_norm == 0.0) return out;

  std::vector<double> r = b, z(n), p(n), Ap(n);
  auto precondition = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (projector) projector->apply(z);
  };
  precondition();
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  std::size_t it = 0;
  while (true) {
    if (it >= max_iter)
      throw ConvergenceError("conjugate gradient did not converge in " + std::to_string(max_iter) +
                                 " iterations (relative residual " + std::to_string(rel) + ")",
                             rel, it);
    A.multiply(p, Ap, opts.exec);
    const double pAp = dot(p, Ap);
    if (!std::isfinite(pAp)) throw NumericalError("conjugate gradient: non-finite curvature");
    if (pAp <= 0.0) break;
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (projector) projector->apply(r);
    ++it;
    rel = std::sqrt(dot(r, r)) / b_norm;
    if (!std::isfinite(rel)) throw NumericalError("conjugate gradient: non-finite residual");
    if (rel <= opts.tol) break;
    precondition();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (projector) projector->apply(out.x);

  // Report the true residual rather than the recursive one.
  A.multiply(out.x, Ap, opts.exec);
  for (std::size_t i = 0; i < n; ++i) Ap[i] -= b[i];
  out.residual = std::sqrt(dot(Ap, Ap)) / b_norm;
  out.iterations = it;
  return out;
}

// Residual b - A x accumulated in extended precision.
void extended_residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b,
                       std::span<double> r, Exec exec) {
  for_each_index(A.rows(), exec, [&](std::size_t i) {
    long double acc = b[i];
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) acc -= static_cast<long double>(vals[p]) * x[cols[p]];
    r[i] = static_cast<double>(acc);
  });
}

CgResult refined_cg(const SparseMatrix& A, std::span<const double> rhs, ComponentProjector* projector,
                    const SolveOptions& opts) {
  auto out = conjugate_gradient(A, rhs, projector, opts);
  if (opts.refinement_steps == 0) return out;
  const std::size_t n = A.rows();
  std::vector<double> b(rhs.begin(), rhs.end()), r(n);
  if (projector) projector->apply(b);
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) return out;
  for (std::size_t step = 0; step < opts.refinement_steps; ++step) {
    extended_residual(A, out.x, b, r, opts.exec);
    if (projector) projector->apply(r);
    SolveOptions inner = opts;
    inner.tol = std::max(opts.tol, 1e-12);
    CgResult corr;
    try {
      corr = conjugate_gradient(A, r, projector, inner);
    } catch (const ConvergenceError&) {
      break;
    }
    for (std::size_t i = 0; i < n; ++i) out.x[i] += corr.x[i];
    out.iterations += corr.iterations;
  }
  if (projector) projector->apply(out.x);
  A.multiply(out.x, r, opts.exec);
  for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
  out.residual = std::sqrt(dot(r, r)) / b_norm;
  return out;
}

}  // namespace

PrecisionMode parse_precision_mode(const std::string& name) {
  if (name == "diagonal") return PrecisionMode::diagonal;
  if (name == "optimal_diagonal") return PrecisionMode::optimal_diagonal;
  throw ParameterError("unknown precision mode '" + name + "'");
}

std::string to_string(PrecisionMode mode) {
  return mode == PrecisionMode::diagonal ? "diagonal" : "optimal_diagonal";
}

std::vector<double> diagonal_precisions(const DeltaFEdgeSet& edges) {
  std::vector<double> w(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!(edges.eps2[e] > 0.0)) throw ParameterError("diagonal_precisions: eps2 must be positive");
    w[e] = 1.0 / edges.eps2[e];
  }
  return w;
}

std::vector<double> optimal_diagonal_precisions(const DeltaFEdgeSet& edges,
                                                const NeighborGraph& graph, Exec exec) {
  const std::size_t n = graph.size();
  const std::size_t m = edges.size();

  // Neighbourhoods containing each point, and edges touching each node.
  std::vector<std::vector<std::size_t>> containing(n), incident(n);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t p : graph.members(v)) containing[p].push_back(v);
  for (std::size_t e = 0; e < m; ++e) {
    incident[edges.source[e]].push_back(e);
    incident[edges.target[e]].push_back(e);
  }

  std::vector<double> w(m);
  const int threads = exec == Exec::parallel ? max_threads() : 1;
  std::vector<std::vector<std::size_t>> count_i(threads, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<std::size_t>> count_j(threads, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<char>> seen_edge(threads, std::vector<char>(m, 0));

  for_each_index(m, exec, [&](std::size_t a) {
    const int t = thread_index(exec);
    auto& ci = count_i[static_cast<std::size_t>(t)];
    auto& cj = count_j[static_cast<std::size_t>(t)];
    auto& seen = seen_edge[static_cast<std::size_t>(t)];
    const std::size_t ends[2] = {edges.source[a], edges.target[a]};
    std::vector<std::size_t> touched_nodes;
    for (int w_end = 0; w_end < 2; ++w_end) {
      auto& cnt = w_end == 0 ? ci : cj;
      for (std::size_t p : graph.members(ends[w_end]))
        for (std::size_t v : containing[p]) {
          if (ci[v] == 0 && cj[v] == 0) touched_nodes.push_back(v);
          ++cnt[v];
        }
    }
    const double dir_a[2] = {edges.dir_i[a], edges.dir_j[a]};
    const double eps_a[2] = {edges.eps_i[a], edges.eps_j[a]};
    const double k_a[2] = {static_cast<double>(graph.k(ends[0])), static_cast<double>(graph.k(ends[1]))};
    auto jac = [&](int w_end, std::size_t v) {
      const double kwv = static_cast<double>(w_end == 0 ? ci[v] : cj[v]);
      if (ends[w_end] == v) return 1.0;
      return kwv / (k_a[w_end] + static_cast<double>(graph.k(v)) - kwv);
    };

    double c_aa = 0.0, sum_sq = 0.0;
    std::vector<std::size_t> touched_edges;
    for (std::size_t v : touched_nodes)
      for (std::size_t b : incident[v]) {
        if (seen[b]) continue;
        seen[b] = 1;
        touched_edges.push_back(b);
        const std::size_t ends_b[2] = {edges.source[b], edges.target[b]};
        const double dir_b[2] = {edges.dir_i[b], edges.dir_j[b]};
        const double eps_b[2] = {edges.eps_i[b], edges.eps_j[b]};
        double c = 0.0;
        for (int we = 0; we < 2; ++we)
          for (int ve = 0; ve < 2; ++ve)
            c += sign_of(dir_a[we] * dir_b[ve]) * jac(we, ends_b[ve]) * (eps_a[we] * eps_b[ve]);
        c *= 0.25;
        if (b == a) c_aa = c;
        sum_sq += c * c;
      }
    for (std::size_t b : touched_edges) seen[b] = 0;
    for (std::size_t v : touched_nodes) ci[v] = cj[v] = 0;
    w[a] = sum_sq > 0.0 ? c_aa / sum_sq : 0.0;
  });

  for (std::size_t e = 0; e < m; ++e)
    if (!(w[e] > 0.0) || !std::isfinite(w[e])) w[e] = 1.0 / edges.eps2[e];
  return w;
}

SolverSystem assemble_system(const DeltaFEdgeSet& edges, std::size_t n,
                             std::span<const double> weights) {
  if (edges.size() == 0) throw StateError("assemble_system: empty edge set");
  if (weights.size() != edges.size()) throw ParameterError("assemble_system: one weight per edge");
  std::vector<Triplet> t;
  t.reserve(4 * edges.size());
  SolverSystem s;
  s.b.assign(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t i = edges.source[e];
    const std::size_t j = edges.target[e];
    if (i >= n || j >= n) throw ParameterError("assemble_system: edge endpoint out of range");
    const double w = weights[e];
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("assemble_system: weights must be positive");
    t.push_back({i, i, w});
    t.push_back({j, j, w});
    t.push_back({i, j, -w});
    t.push_back({j, i, -w});
    const double flux = w * edges.delta_f[e];
    s.b[i] -= flux;
    s.b[j] += flux;
  }
  s.A = SparseMatrix(n, std::move(t));
  s.n_edges = edges.size();
  auto comps = connected_components(n, edges.source, edges.target);
  s.component_labels = std::move(comps.labels);
  s.n_components = comps.count;
  return s;
}

SolverSystem assemble_system(const DeltaFEdgeSet& edges, std::size_t n, PrecisionMode mode,
                             const NeighborGraph* graph, Exec exec) {
  if (edges.size() == 0) throw StateError("assemble_system: empty edge set");
  if (mode == PrecisionMode::diagonal) return assemble_system(edges, n, diagonal_precisions(edges));
  if (graph == nullptr) throw ParameterError("assemble_system: optimal_diagonal needs the neighbour graph");
  return assemble_system(edges, n, optimal_diagonal_precisions(edges, *graph, exec));
}

LogDensityEstimate solve_bmti(const SolverSystem& system, const SolveOptions& opts) {
  ComponentProjector proj(system.component_labels, system.n_components);
  auto cg = refined_cg(system.A, system.b, &proj, opts);
  LogDensityEstimate est;
  est.F = std::move(cg.x);
  est.method = "bmti";
  est.alpha = 1.0;
  est.cg_iterations = cg.iterations;
  est.residual = cg.residual;
  return est;
}

std::vector<double> estimate_uncertainties(const SolverSystem& system, std::size_t cap) {
  const std::size_t n = system.size();
  if (n > cap)
    throw CapabilityError("estimate_uncertainties: N = " + std::to_string(n) + " exceeds the dense cap of " +
                          std::to_string(cap) + "; run without uncertainties");
  std::vector<std::vector<std::size_t>> members(system.n_components);
  for (std::size_t i = 0; i < n; ++i) members[system.component_labels[i]].push_back(i);

  std::vector<double> var(n, 0.0);
  for (const auto& comp : members) {
    const auto nc = static_cast<Eigen::Index>(comp.size());
    if (nc == 1) continue;
    // Ground the last node: X = L_g^-1 padded with a zero row and column,
    // then pinv(L) = P X P with P the centring projector.
    const Eigen::Index ng = nc - 1;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(ng, ng);
    for (Eigen::Index a = 0; a < ng; ++a) {
      const std::size_t r = comp[static_cast<std::size_t>(a)];
      const auto cols = system.A.row_cols(r);
      const auto vals = system.A.row_values(r);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        const auto it = std::lower_bound(comp.begin(), comp.end(), cols[p]);
        const auto c = static_cast<Eigen::Index>(it - comp.begin());
        if (c < ng) L(a, c) += vals[p];
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw NumericalError("estimate_uncertainties: factorisation failed");
    const Eigen::MatrixXd X = ldlt.solve(Eigen::MatrixXd::Identity(ng, ng));
    const Eigen::VectorXd row = X.rowwise().sum();
    const double inv_n = 1.0 / static_cast<double>(nc);
    const double total = row.sum() * inv_n * inv_n;
    for (Eigen::Index a = 0; a < ng; ++a)
      var[comp[static_cast<std::size_t>(a)]] = X(a, a) - 2.0 * row[a] * inv_n + total;
    var[comp.back()] = total;
  }
  return var;
}

KnnAnchor knn_anchor(const PointCloud& cloud, const NeighborGraph& graph, double d) {
  const std::size_t n = cloud.size();
  const double log_n = std::log(static_cast<double>(n));
  const double log_omega = log_unit_ball_volume(d);
  KnnAnchor a;
  a.F0.resize(n);
  a.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = graph.k(i);
    double r;
    if (auto nd = graph.next_distance(i)) {
      r = *nd;
    } else {
      r = knn_query(cloud, i, std::min(k, n - 1)).distances.back();
    }
    if (!(r > 0.0)) throw DataError("knn_anchor: zero neighbour distance at point " + std::to_string(i));
    a.F0[i] = -(std::log(static_cast<double>(k)) - log_n - log_omega - d * std::log(r));
    a.h[i] = static_cast<double>(k);
  }
  return a;
}

LogDensityEstimate solve_regularized(const SolverSystem& system, const KnnAnchor& anchor,
                                     double alpha, const SolveOptions& opts) {
  const std::size_t n = system.size();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("solve_regularized: alpha must lie in [0, 1]");
  if (alpha == 1.0) {
    auto est = solve_bmti(system, opts);
    if (system.n_components > 1)
      est.warnings.push_back("graph has " + std::to_string(system.n_components) +
                             " components; each is gauge-fixed to zero mean separately");
    return est;
  }
  if (anchor.F0.size() != n || anchor.h.size() != n)
    throw ParameterError("solve_regularized: anchor length differs from N");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(anchor.F0[i]) || !(anchor.h[i] > 0.0))
      throw ParameterError("solve_regularized: anchor must be finite with positive curvature");

  LogDensityEstimate est;
  est.alpha = alpha;
  est.method = "bmti";
  if (alpha == 0.0) {
    est.F = anchor.F0;
    return est;
  }
  std::vector<double> diag(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = (1.0 - alpha) * anchor.h[i];
    rhs[i] = alpha * system.b[i] + diag[i] * anchor.F0[i];
  }
  const SparseMatrix M = system.A.scaled_plus_diagonal(alpha, diag);
  auto cg = refined_cg(M, rhs, nullptr, opts);
  est.F = std::move(cg.x);
  est.cg_iterations = cg.iterations;
  est.residual = cg.residual;
  return est;
}

}  // namespace bmti
