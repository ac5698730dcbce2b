// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmti/parallel.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

/// Exact k-nearest-neighbour search over a PointCloud.
///
/// Uses a k-d tree for D <= 15 and an exhaustive scan above that, where the
/// tree no longer prunes. Neighbours are ordered by (distance, index), so
/// equal distances resolve to the lower index and results are deterministic.
class KnnIndex {
 public:
  static constexpr std::size_t kMaxTreeDim = 15;

  explicit KnnIndex(const PointCloud& cloud, std::size_t leaf_size = 16);

  /// k nearest neighbours of point i, excluding i.
  NeighborQueryResult query(std::size_t i, std::size_t k) const;

  bool uses_tree() const noexcept { return !nodes_.empty(); }

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    std::size_t split_dim;
    double split_value;
    std::ptrdiff_t left;
    std::ptrdiff_t right;
  };

  std::ptrdiff_t build(std::size_t begin, std::size_t end);

  const PointCloud* cloud_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Row-major N x k table of neighbour indices and distances.
struct KnnTable {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::span<const std::size_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
  std::span<const double> dists(std::size_t i) const { return {distances.data() + i * k, k}; }
};

/// Single query; builds no index and scans all points.
NeighborQueryResult knn_query(const PointCloud& cloud, std::size_t i, std::size_t k);

/// k nearest neighbours of every point.
KnnTable all_knn(const PointCloud& cloud, std::size_t k, Exec exec = Exec::parallel);

}  // namespace bmti
