// SPDX-License-Identifier: Apache-2.0

#include "bmti/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "bmti/error.hpp"

namespace bmti {

namespace {

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

// Bounded max-heap keeping the k best candidates under (d2, index) ordering.
class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  bool full() const { return heap_.size() == k_; }
  double worst() const { return full() ? heap_.front().d2 : INFINITY; }

  void offer(Candidate c) {
    if (!full()) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  NeighborQueryResult finish() {
    std::sort(heap_.begin(), heap_.end());
    NeighborQueryResult out;
    out.indices.reserve(heap_.size());
    out.distances.reserve(heap_.size());
    for (const auto& c : heap_) {
      out.indices.push_back(c.index);
      out.distances.push_back(std::sqrt(c.d2));
    }
    return out;
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

void check_k(const PointCloud& cloud, std::size_t i, std::size_t k) {
  if (i >= cloud.size()) throw ParameterError("knn: point index out of range");
  if (k < 1 || k > cloud.size() - 1)
    throw ParameterError("knn: k must lie in [1, N-1], got " + std::to_string(k));
}

}  // namespace

NeighborQueryResult knn_query(const PointCloud& cloud, std::size_t i, std::size_t k) {
  check_k(cloud, i, k);
  BestK best(k);
  const auto xi = cloud.point(i);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (j == i) continue;
    best.offer({squared_distance(xi, cloud.point(j)), j});
  }
  return best.finish();
}

KnnIndex::KnnIndex(const PointCloud& cloud, std::size_t leaf_size)
    : cloud_(&cloud), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(cloud.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (cloud.dim() <= kMaxTreeDim) {
    nodes_.reserve(2 * cloud.size() / leaf_size_ + 1);
    build(0, cloud.size());
  }
}

std::ptrdiff_t KnnIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t dim = cloud_->dim();
  const auto id = static_cast<std::ptrdiff_t>(nodes_.size());
  nodes_.push_back({begin, end, 0, 0.0, -1, -1});
  if (end - begin <= leaf_size_) return id;

  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t a = 0; a < dim; ++a) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t p = begin; p < end; ++p) {
      const double v = cloud_->point(order_[p])[a];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = a;
    }
  }
  if (best_spread <= 0.0) return id;  // all points coincide: keep as a leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     return cloud_->point(a)[best_dim] < cloud_->point(b)[best_dim];
                   });
  const double split = cloud_->point(order_[mid])[best_dim];
  nodes_[static_cast<std::size_t>(id)].split_dim = best_dim;
  nodes_[static_cast<std::size_t>(id)].split_value = split;
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

NeighborQueryResult KnnIndex::query(std::size_t i, std::size_t k) const {
  check_k(*cloud_, i, k);
  if (nodes_.empty()) return knn_query(*cloud_, i, k);

  BestK best(k);
  const auto xi = cloud_->point(i);
  // Left half holds values <= split, right half values >= split.
  auto visit = [&](auto&& self, std::ptrdiff_t id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t p = node.begin; p < node.end; ++p) {
        const std::size_t j = order_[p];
        if (j == i) continue;
        best.offer({squared_distance(xi, cloud_->point(j)), j});
      }
      return;
    }
    const double diff = xi[node.split_dim] - node.split_value;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    self(self, near);
    if (diff * diff <= best.worst()) self(self, far);
  };
  visit(visit, 0);
  return best.finish();
}

KnnTable all_knn(const PointCloud& cloud, std::size_t k, Exec exec) {
  check_k(cloud, 0, k);
  KnnIndex index(cloud);
  KnnTable table;
  table.n = cloud.size();
  table.k = k;
  table.indices.resize(table.n * k);
  table.distances.resize(table.n * k);
  for_each_index(table.n, exec, [&](std::size_t i) {
    auto r = index.query(i, k);
    std::copy(r.indices.begin(), r.indices.end(), table.indices.begin() + static_cast<std::ptrdiff_t>(i * k));
    std::copy(r.distances.begin(), r.distances.end(), table.distances.begin() + static_cast<std::ptrdiff_t>(i * k));
  });
  return table;
}

}  // namespace bmti
