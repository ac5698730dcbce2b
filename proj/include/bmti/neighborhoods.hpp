// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bmti/intrinsic_dim.hpp"
#include "bmti/knn.hpp"
#include "bmti/parallel.hpp"
#include "bmti/point_cloud.hpp"

namespace bmti {

struct AdaptiveKOptions {
  std::size_t k_min = 4;
  std::size_t k_max = 256;
  /// Chi-squared(1) quantile at p = 1e-6.
  double lr_threshold = 23.928;
};

/// Neighbour table wide enough for select_adaptive_k / build_neighbor_graph.
KnnTable adaptive_knn_table(const PointCloud& cloud, const AdaptiveKOptions& opts,
                            Exec exec = Exec::parallel);

/// Adaptive neighbourhood sizes k_i (centre included, so k_i - 1 neighbours).
///
/// k_i starts at k_min and grows while the likelihood-ratio test between i
/// and its next neighbour accepts a common density.
std::vector<std::size_t> select_adaptive_k(const PointCloud& cloud, const IntrinsicDim& id,
                                           const AdaptiveKOptions& opts = {},
                                           Exec exec = Exec::parallel);
std::vector<std::size_t> select_adaptive_k(const KnnTable& table, const IntrinsicDim& id,
                                           const AdaptiveKOptions& opts = {},
                                           Exec exec = Exec::parallel);

/// Log-likelihood-ratio statistic for two neighbour-shell radii at the same
/// neighbour count `ksel`, in intrinsic dimension `d`.
double likelihood_ratio_statistic(double r_i, double r_j, std::size_t ksel, double d);

/// Directed neighbourhood graph. Edge e = (source, neighbor[e]) for every
/// listed neighbour; edges of point i occupy [offset(i), offset(i+1)).
class NeighborGraph {
 public:
  /// Builds from explicit neighbour lists (self excluded, ordered by distance).
  static NeighborGraph from_lists(const PointCloud& cloud,
                                  const std::vector<std::vector<std::size_t>>& lists,
                                  Exec exec = Exec::parallel);

  std::size_t size() const noexcept { return k_.size(); }
  std::size_t n_edges() const noexcept { return neighbors_.size(); }

  std::size_t k(std::size_t i) const { return k_[i]; }
  std::span<const std::size_t> ks() const noexcept { return k_; }

  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> neighbor_distances(std::size_t i) const {
    return {distances_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  /// Distance to the outermost listed neighbour.
  double radius(std::size_t i) const { return distances_[offsets_[i + 1] - 1]; }
  /// Distance to the next neighbour beyond the neighbourhood (rank k_i), if known.
  std::optional<double> next_distance(std::size_t i) const;

  /// Omega_i including the centre, sorted by index.
  std::span<const std::size_t> members(std::size_t i) const {
    return {members_.data() + member_offsets_[i], member_offsets_[i + 1] - member_offsets_[i]};
  }

  std::size_t edge_offset(std::size_t i) const { return offsets_[i]; }
  std::size_t edge_source(std::size_t e) const { return sources_[e]; }
  std::size_t edge_target(std::size_t e) const { return neighbors_[e]; }
  /// k_{i,j} for edge e.
  std::size_t edge_overlap(std::size_t e) const { return overlaps_[e]; }

  std::optional<std::size_t> find_edge(std::size_t i, std::size_t j) const;
  /// |Omega_i intersect Omega_j| for any pair.
  std::size_t overlap(std::size_t i, std::size_t j) const;

 private:
  friend NeighborGraph build_neighbor_graph(const PointCloud&, std::span<const std::size_t>,
                                            const KnnTable*, Exec);
  void finalize(Exec exec);

  std::vector<std::size_t> k_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> neighbors_;
  std::vector<std::size_t> sources_;
  std::vector<double> distances_;
  std::vector<double> next_distance_;
  std::vector<std::size_t> member_offsets_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> overlaps_;
};

/// Builds the graph with k_i - 1 nearest neighbours per point. A table from
/// adaptive_knn_table (or any table with k >= max k_i) avoids a second search.
NeighborGraph build_neighbor_graph(const PointCloud& cloud, std::span<const std::size_t> k,
                                   const KnnTable* table = nullptr, Exec exec = Exec::parallel);

/// Jaccard index k_ij / (k_i + k_j - k_ij); 1 when i == j.
double jaccard_overlap(const NeighborGraph& graph, std::size_t i, std::size_t j);

struct Components {
  std::vector<std::size_t> labels;
  std::size_t count = 0;
};

/// Weakly connected components, labelled in order of the lowest member index.
Components connected_components(const NeighborGraph& graph);
Components connected_components(std::size_t n, std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets);

}  // namespace bmti
