// SPDX-License-Identifier: Apache-2.0

#include "bmti/point_cloud.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bmti/error.hpp"

namespace bmti {

PointCloud::PointCloud(std::vector<double> coords, std::size_t dim,
                       std::optional<std::vector<double>> truth_f)
    : coords_(std::move(coords)), dim_(dim), n_(0), truth_(std::move(truth_f)) {
  if (dim_ == 0) throw ParameterError("PointCloud: dimension must be >= 1");
  if (coords_.size() % dim_ != 0)
    throw ParameterError("PointCloud: coordinate count is not a multiple of the dimension");
  n_ = coords_.size() / dim_;
  if (n_ < 2) throw ParameterError("PointCloud: at least 2 points are required");
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (!std::isfinite(coords_[k]))
      throw DataError("PointCloud: non-finite coordinate at point " + std::to_string(k / dim_));
  }
  if (truth_) {
    if (truth_->size() != n_) throw ParameterError("PointCloud: truth length differs from N");
    for (double f : *truth_)
      if (!std::isfinite(f)) throw DataError("PointCloud: non-finite truth value");
  }
}

PointCloud PointCloud::from_float(std::span<const float> coords, std::size_t dim,
                                  std::optional<std::vector<double>> truth_f) {
  return PointCloud(std::vector<double>(coords.begin(), coords.end()), dim, std::move(truth_f));
}

std::span<const double> PointCloud::truth() const {
  if (!truth_) throw StateError("PointCloud: no ground truth attached");
  return *truth_;
}

PointCloud PointCloud::with_truth(std::vector<double> truth_f) const {
  return PointCloud(coords_, dim_, std::move(truth_f));
}

PointCloud PointCloud::without_truth() const { return PointCloud(coords_, dim_); }

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

double log_unit_ball_volume(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw ParameterError("unit_ball_volume: d must be positive");
  return std::log(2.0 / d) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d);
}

double unit_ball_volume(double d) { return std::exp(log_unit_ball_volume(d)); }

}  // namespace bmti
