// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bmti {

/// N points in D dimensions, stored row-major in double precision, with an
/// optional ground-truth negative log-density per point. Immutable.
class PointCloud {
 public:
  PointCloud(std::vector<double> coords, std::size_t dim,
             std::optional<std::vector<double>> truth_f = std::nullopt);

  /// Widens single-precision input.
  static PointCloud from_float(std::span<const float> coords, std::size_t dim,
                               std::optional<std::vector<double>> truth_f = std::nullopt);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  bool has_truth() const noexcept { return truth_.has_value(); }
  /// Throws StateError when no ground truth is attached.
  std::span<const double> truth() const;

  PointCloud with_truth(std::vector<double> truth_f) const;
  PointCloud without_truth() const;

 private:
  std::vector<double> coords_;
  std::size_t dim_;
  std::size_t n_;
  std::optional<std::vector<double>> truth_;
};

struct NeighborQueryResult {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Volume of the unit ball in `d` dimensions; `d` may be non-integer.
double unit_ball_volume(double d);

/// Natural log of unit_ball_volume, finite for large d.
double log_unit_ball_volume(double d);

}  // namespace bmti
