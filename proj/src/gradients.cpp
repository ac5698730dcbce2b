// SPDX-License-Identifier: Apache-2.0

#include "bmti/gradients.hpp"

#include <string>

#include "bmti/error.hpp"

namespace bmti {

namespace {

Eigen::Map<const Vector> point_vec(const PointCloud& cloud, std::size_t i) {
  return {cloud.point(i).data(), static_cast<Eigen::Index>(cloud.dim())};
}

double prefactor(const NeighborGraph& graph, const IntrinsicDim& id, std::size_t i) {
  const double r = graph.radius(i);
  if (!(r > 0.0)) throw DataError("gradient: zero neighbourhood radius at point " + std::to_string(i));
  return (id.d + 2.0) / (r * r);
}

struct LocalMoments {
  Vector shift;
  Matrix scatter;  // sum (s - m)(s - m)^T
};

LocalMoments local_moments(const NeighborGraph& graph, const PointCloud& cloud, std::size_t i) {
  const auto nb = graph.neighbors(i);
  const auto xi = point_vec(cloud, i);
  const auto dim = static_cast<Eigen::Index>(cloud.dim());
  LocalMoments out{Vector::Zero(dim), Matrix::Zero(dim, dim)};
  for (std::size_t j : nb) out.shift += point_vec(cloud, j) - xi;
  out.shift /= static_cast<double>(nb.size());
  Vector c(dim);
  for (std::size_t j : nb) {
    c = point_vec(cloud, j) - xi - out.shift;
    out.scatter.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  out.scatter = out.scatter.selfadjointView<Eigen::Lower>();
  return out;
}

Matrix clip_psd(Matrix v, std::size_t i) {
  const double trace = v.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
  const auto& lambda = eig.eigenvalues();
  if (lambda.minCoeff() >= 0.0) return v;
  const double tol = 1e-12 * std::max(trace, 0.0);
  if (lambda.minCoeff() < -tol)
    throw DataError("gradient covariance is not positive semidefinite at point " + std::to_string(i));
  const Vector clipped = lambda.cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix autocovariance_from(const LocalMoments& mom, double pref, std::size_t k, std::size_t i) {
  if (k < 4) throw ParameterError("gradient covariance needs k_i >= 4");
  const double kt = static_cast<double>(k - 1);
  Matrix v = mom.scatter * (pref * pref / (static_cast<double>(k - 2) * kt));
  return clip_psd(std::move(v), i);
}

}  // namespace

GradientField::GradientField(std::size_t n, std::size_t dim, double d)
    : n_(n), dim_(dim), d_(d), g_(n * dim, 0.0), shift_(n * dim, 0.0), var_(n * dim * dim, 0.0) {}

Vector sample_mean_shift(const NeighborGraph& graph, const PointCloud& cloud, std::size_t i) {
  const auto nb = graph.neighbors(i);
  const auto xi = point_vec(cloud, i);
  Vector m = Vector::Zero(static_cast<Eigen::Index>(cloud.dim()));
  for (std::size_t j : nb) m += point_vec(cloud, j) - xi;
  return m / static_cast<double>(nb.size());
}

Vector estimate_gradient(const NeighborGraph& graph, const PointCloud& cloud,
                         const IntrinsicDim& id, std::size_t i) {
  return -prefactor(graph, id, i) * sample_mean_shift(graph, cloud, i);
}

Matrix gradient_autocovariance(const NeighborGraph& graph, const PointCloud& cloud,
                               const IntrinsicDim& id, std::size_t i) {
  return autocovariance_from(local_moments(graph, cloud, i), prefactor(graph, id, i), graph.k(i), i);
}

Matrix gradient_cross_covariance(const NeighborGraph& graph, const PointCloud& cloud,
                                 const IntrinsicDim& id, std::size_t i, std::size_t j) {
  const auto dim = static_cast<Eigen::Index>(cloud.dim());
  const auto mi = graph.members(i);
  const auto mj = graph.members(j);
  const auto xi = point_vec(cloud, i);
  const auto xj = point_vec(cloud, j);
  Matrix acc = Matrix::Zero(dim, dim);
  std::size_t shared = 0;
  std::size_t p = 0, q = 0;
  while (p < mi.size() && q < mj.size()) {
    if (mi[p] < mj[q]) {
      ++p;
    } else if (mj[q] < mi[p]) {
      ++q;
    } else {
      const std::size_t s = mi[p];
      if (s != i && s != j) {
        acc += (point_vec(cloud, s) - xi) * (point_vec(cloud, s) - xj).transpose();
        ++shared;
      }
      ++p;
      ++q;
    }
  }
  if (shared == 0) return Matrix::Zero(dim, dim);
  const Vector m_i = sample_mean_shift(graph, cloud, i);
  const Vector m_j = sample_mean_shift(graph, cloud, j);
  const double kti = static_cast<double>(graph.k(i) - 1);
  const double ktj = static_cast<double>(graph.k(j) - 1);
  const double ks = static_cast<double>(shared);
  const double scale = prefactor(graph, id, i) * prefactor(graph, id, j) * ks / (kti * ktj);
  return scale * (acc / ks - m_i * m_j.transpose());
}

GradientField compute_gradient_field(const NeighborGraph& graph, const PointCloud& cloud,
                                     const IntrinsicDim& id, Exec exec) {
  if (graph.size() != cloud.size()) throw ParameterError("compute_gradient_field: size mismatch");
  GradientField field(cloud.size(), cloud.dim(), id.d);
  for_each_index(cloud.size(), exec, [&](std::size_t i) {
    const LocalMoments mom = local_moments(graph, cloud, i);
    const double pref = prefactor(graph, id, i);
    field.mean_shift(i) = mom.shift;
    field.g(i) = -pref * mom.shift;
    field.var(i) = autocovariance_from(mom, pref, graph.k(i), i);
  });
  return field;
}

}  // namespace bmti
