// SPDX-License-Identifier: Apache-2.0

#include "bmti/neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bmti/error.hpp"

namespace bmti {

namespace {

void check_options(const AdaptiveKOptions& opts, std::size_t n) {
  if (opts.k_min < 4) throw ParameterError("adaptive k: k_min must be >= 4");
  if (opts.k_max < opts.k_min) throw ParameterError("adaptive k: k_max < k_min");
  if (!(opts.lr_threshold > 0.0)) throw ParameterError("adaptive k: threshold must be positive");
  if (n < opts.k_min + 1)
    throw ParameterError("adaptive k: need at least k_min + 1 = " + std::to_string(opts.k_min + 1) +
                         " points");
}

std::size_t table_width(const AdaptiveKOptions& opts, std::size_t n) {
  return std::min(opts.k_max, n - 1);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

double likelihood_ratio_statistic(double r_i, double r_j, std::size_t ksel, double d) {
  // -2 ksel [log v_i + log v_j - 2 log(v_i + v_j) + log 4]; the ball constant cancels.
  const double a = d * std::log(r_i);
  const double b = d * std::log(r_j);
  const double hi = std::max(a, b);
  const double log_sum = hi + std::log1p(std::exp(-std::abs(a - b)));
  return -2.0 * static_cast<double>(ksel) * (a + b - 2.0 * log_sum + std::log(4.0));
}

KnnTable adaptive_knn_table(const PointCloud& cloud, const AdaptiveKOptions& opts, Exec exec) {
  check_options(opts, cloud.size());
  return all_knn(cloud, table_width(opts, cloud.size()), exec);
}

std::vector<std::size_t> select_adaptive_k(const KnnTable& table, const IntrinsicDim& id,
                                           const AdaptiveKOptions& opts, Exec exec) {
  check_options(opts, table.n);
  const std::size_t k_cap = table_width(opts, table.n);
  if (table.k < k_cap) throw ParameterError("select_adaptive_k: neighbour table too narrow");
  if (!(id.d > 0.0)) throw ParameterError("select_adaptive_k: intrinsic dimension must be positive");

  std::vector<std::size_t> k(table.n, opts.k_min);
  for_each_index(table.n, exec, [&](std::size_t i) {
    const auto nb = table.neighbors(i);
    const auto di = table.dists(i);
    std::size_t accepted = opts.k_min;
    for (std::size_t j = opts.k_min + 1; j <= k_cap; ++j) {
      const std::size_t ksel = j - 1;
      const std::size_t other = nb[j - 1];
      const double r_i = di[ksel - 1];
      const double r_j = table.dists(other)[ksel - 1];
      if (!(r_i > 0.0) || !(r_j > 0.0)) break;
      if (likelihood_ratio_statistic(r_i, r_j, ksel, id.d) > opts.lr_threshold) break;
      accepted = j;
    }
    k[i] = accepted;
  });
  return k;
}

std::vector<std::size_t> select_adaptive_k(const PointCloud& cloud, const IntrinsicDim& id,
                                           const AdaptiveKOptions& opts, Exec exec) {
  return select_adaptive_k(adaptive_knn_table(cloud, opts, exec), id, opts, exec);
}

std::optional<double> NeighborGraph::next_distance(std::size_t i) const {
  const double v = next_distance_[i];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> NeighborGraph::find_edge(std::size_t i, std::size_t j) const {
  for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e)
    if (neighbors_[e] == j) return e;
  return std::nullopt;
}

std::size_t NeighborGraph::overlap(std::size_t i, std::size_t j) const {
  const auto a = members(i);
  const auto b = members(j);
  std::size_t count = 0;
  std::size_t p = 0, q = 0;
  while (p < a.size() && q < b.size()) {
    if (a[p] < b[q]) {
      ++p;
    } else if (b[q] < a[p]) {
      ++q;
    } else {
      ++count;
      ++p;
      ++q;
    }
  }
  return count;
}

void NeighborGraph::finalize(Exec exec) {
  const std::size_t n = k_.size();
  sources_.resize(neighbors_.size());
  member_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) sources_[e] = i;
    member_offsets_[i + 1] = member_offsets_[i] + (offsets_[i + 1] - offsets_[i]) + 1;
  }
  members_.resize(member_offsets_[n]);
  for_each_index(n, exec, [&](std::size_t i) {
    auto out = members_.begin() + static_cast<std::ptrdiff_t>(member_offsets_[i]);
    *out = i;
    std::copy(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]), out + 1);
    std::sort(out, members_.begin() + static_cast<std::ptrdiff_t>(member_offsets_[i + 1]));
  });
  overlaps_.resize(neighbors_.size());
  for_each_index(n, exec, [&](std::size_t i) {
    for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) overlaps_[e] = overlap(i, neighbors_[e]);
  });
}

NeighborGraph NeighborGraph::from_lists(const PointCloud& cloud,
                                        const std::vector<std::vector<std::size_t>>& lists,
                                        Exec exec) {
  const std::size_t n = cloud.size();
  if (lists.size() != n) throw ParameterError("NeighborGraph: one list per point is required");
  NeighborGraph g;
  g.k_.resize(n);
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (lists[i].empty()) throw ParameterError("NeighborGraph: empty neighbour list");
    g.offsets_[i + 1] = g.offsets_[i] + lists[i].size();
    g.k_[i] = lists[i].size() + 1;
  }
  g.neighbors_.resize(g.offsets_[n]);
  g.distances_.resize(g.offsets_[n]);
  g.next_distance_.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> seen = lists[i];
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw ParameterError("NeighborGraph: duplicate neighbour");
    double prev = 0.0;
    for (std::size_t t = 0; t < lists[i].size(); ++t) {
      const std::size_t j = lists[i][t];
      if (j >= n || j == i) throw ParameterError("NeighborGraph: invalid neighbour index");
      const double r = distance(cloud.point(i), cloud.point(j));
      if (r < prev) throw ParameterError("NeighborGraph: neighbour lists must be distance-ordered");
      prev = r;
      g.neighbors_[g.offsets_[i] + t] = j;
      g.distances_[g.offsets_[i] + t] = r;
    }
    if (!(prev > 0.0)) throw DataError("NeighborGraph: zero neighbourhood radius at point " + std::to_string(i));
  }
  g.finalize(exec);
  return g;
}

NeighborGraph build_neighbor_graph(const PointCloud& cloud, std::span<const std::size_t> k,
                                   const KnnTable* table, Exec exec) {
  const std::size_t n = cloud.size();
  if (k.size() != n) throw ParameterError("build_neighbor_graph: k has wrong length");
  std::size_t k_max = 0;
  for (std::size_t v : k) {
    if (v < 2 || v > n) throw ParameterError("build_neighbor_graph: k_i must lie in [2, N]");
    k_max = std::max(k_max, v);
  }
  KnnTable local;
  if (table == nullptr || table->k < k_max - 1 || table->n != n) {
    local = all_knn(cloud, std::min(k_max, n - 1), exec);
    table = &local;
  }

  NeighborGraph g;
  g.k_.assign(k.begin(), k.end());
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + (k[i] - 1);
  g.neighbors_.resize(g.offsets_[n]);
  g.distances_.resize(g.offsets_[n]);
  g.next_distance_.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = table->neighbors(i);
    const auto dist = table->dists(i);
    const std::size_t m = k[i] - 1;
    std::copy(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(m),
              g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]));
    std::copy(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m),
              g.distances_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]));
    if (m < table->k) g.next_distance_[i] = dist[m];
    if (!(dist[m - 1] > 0.0))
      throw DataError("build_neighbor_graph: zero neighbourhood radius at point " + std::to_string(i));
  }
  g.finalize(exec);
  return g;
}

double jaccard_overlap(const NeighborGraph& graph, std::size_t i, std::size_t j) {
  if (i == j) return 1.0;
  const double kij = static_cast<double>(graph.overlap(i, j));
  return kij / (static_cast<double>(graph.k(i)) + static_cast<double>(graph.k(j)) - kij);
}

Components connected_components(std::size_t n, std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets) {
  UnionFind uf(n);
  for (std::size_t e = 0; e < sources.size(); ++e) uf.unite(sources[e], targets[e]);
  Components c;
  c.labels.assign(n, 0);
  std::vector<std::size_t> label_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (label_of_root[r] == n) label_of_root[r] = c.count++;
    c.labels[i] = label_of_root[r];
  }
  return c;
}

Components connected_components(const NeighborGraph& graph) {
  std::vector<std::size_t> src(graph.n_edges()), dst(graph.n_edges());
  for (std::size_t e = 0; e < graph.n_edges(); ++e) {
    src[e] = graph.edge_source(e);
    dst[e] = graph.edge_target(e);
  }
  return connected_components(graph.size(), src, dst);
}

}  // namespace bmti
