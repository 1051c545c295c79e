// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "magkit/metric.hpp"

namespace magkit {

/// Membership predicates shared by the tree and any brute-force scan.
/// Boundary points count as inside.
inline bool in_linf_box(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                        const Eigen::Ref<const Eigen::RowVectorXd>& center,
                        double h) {
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (std::abs(p[k] - center[k]) > h) return false;
  }
  return true;
}

inline bool in_l2_ball(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                       const Eigen::Ref<const Eigen::RowVectorXd>& center,
                       double h) {
  return point_distance(p, center, Metric::l2) <= h;
}

/// Static k-d tree answering exact range-count queries.
///
/// Nodes store their bounding boxes. A subtree is skipped only when every
/// point in it provably fails the membership predicate (floating-point
/// subtraction is monotone, so fl(lo - x) > h implies fl(p - x) > h for all
/// p >= lo), which keeps the counts identical to a linear scan.
class KdTree {
 public:
  explicit KdTree(const Matrix& points, std::size_t leaf_size = 16)
      : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    index_.resize(static_cast<std::size_t>(points_.rows()));
    std::iota(index_.begin(), index_.end(), Eigen::Index{0});
    if (!index_.empty()) build(0, index_.size());
  }

  std::size_t size() const { return index_.size(); }

  /// Number of points p with |p_k - center_k| <= h for every k.
  std::size_t count_linf(const Eigen::Ref<const Eigen::RowVectorXd>& center,
                         double h) const {
    if (nodes_.empty()) return 0;
    return count_box(0, center, h);
  }

  /// Number of points within Euclidean distance h of center.
  std::size_t count_l2(const Eigen::Ref<const Eigen::RowVectorXd>& center,
                       double h) const {
    if (nodes_.empty()) return 0;
    return count_ball(0, center, h);
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    Eigen::RowVectorXd lo;
    Eigen::RowVectorXd hi;
    std::ptrdiff_t left = -1;
    std::ptrdiff_t right = -1;
  };

  std::ptrdiff_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::ptrdiff_t>(nodes_.size());
    nodes_.push_back(Node{});
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = points_.row(index_[begin]);
    node.hi = node.lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      node.lo = node.lo.cwiseMin(points_.row(index_[i]));
      node.hi = node.hi.cwiseMax(points_.row(index_[i]));
    }
    if (end - begin > leaf_size_) {
      Eigen::Index axis = 0;
      (node.hi - node.lo).maxCoeff(&axis);
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                       index_.begin() + static_cast<std::ptrdiff_t>(mid),
                       index_.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return points_(a, axis) < points_(b, axis);
                       });
      node.left = build(begin, mid);
      node.right = build(mid, end);
    }
    nodes_[static_cast<std::size_t>(id)] = std::move(node);
    return id;
  }

  std::size_t count_box(std::ptrdiff_t id,
                        const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        double h) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    bool contained = true;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (node.lo[k] - x[k] > h || x[k] - node.hi[k] > h) return 0;
      if (node.hi[k] - x[k] > h || x[k] - node.lo[k] > h) contained = false;
    }
    if (contained) return node.end - node.begin;
    if (node.left < 0) {
      std::size_t c = 0;
      for (std::size_t i = node.begin; i < node.end; ++i) {
        if (in_linf_box(points_.row(index_[i]), x, h)) ++c;
      }
      return c;
    }
    return count_box(node.left, x, h) + count_box(node.right, x, h);
  }

  std::size_t count_ball(std::ptrdiff_t id,
                         const Eigen::Ref<const Eigen::RowVectorXd>& x,
                         double h) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    double gap2 = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double g = std::max({node.lo[k] - x[k], x[k] - node.hi[k], 0.0});
      gap2 += g * g;
    }
    // slack absorbs rounding in the lower bound; exact test happens per point
    if (std::sqrt(gap2) > h * (1.0 + 1e-9) + 1e-300) return 0;
    if (node.left < 0) {
      std::size_t c = 0;
      for (std::size_t i = node.begin; i < node.end; ++i) {
        if (in_l2_ball(points_.row(index_[i]), x, h)) ++c;
      }
      return c;
    }
    return count_ball(node.left, x, h) + count_ball(node.right, x, h);
  }

  const Matrix& points_;
  std::size_t leaf_size_;
  std::vector<Eigen::Index> index_;
  std::vector<Node> nodes_;
};

}  // namespace magkit
