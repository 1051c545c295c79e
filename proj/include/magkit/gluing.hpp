// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/metric.hpp"
#include "magkit/weighting.hpp"

namespace magkit {

using IndexList = std::vector<Eigen::Index>;

/// Splits 0..n-1 into a head block (Y) and a tail block (the complement).
struct BlockPartition {
  IndexList head;
  IndexList tail;

  std::size_t size() const { return head.size() + tail.size(); }

  /// Throws unless head and tail are disjoint and cover 0..n-1. Empty blocks
  /// are rejected unless allow_empty is set.
  void validate(Eigen::Index n, bool allow_empty = false) const {
    if (static_cast<Eigen::Index>(size()) != n) {
      throw InputError("partition does not cover the index range");
    }
    if (!allow_empty && (head.empty() || tail.empty())) {
      throw InputError("partition blocks must both be nonempty");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const IndexList* block : {&head, &tail}) {
      for (Eigen::Index i : *block) {
        if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)]) {
          throw InputError("partition indices must be distinct and in range");
        }
        seen[static_cast<std::size_t>(i)] = true;
      }
    }
  }

  /// Block order: head indices followed by tail indices.
  IndexList order() const {
    IndexList out = head;
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
  }

  /// Partition with the given head; the tail is the remaining indices in
  /// ascending order.
  static BlockPartition with_head(Eigen::Index n, IndexList head) {
    std::vector<bool> in_head(static_cast<std::size_t>(n), false);
    for (Eigen::Index i : head) {
      if (i < 0 || i >= n) throw InputError("head index out of range");
      in_head[static_cast<std::size_t>(i)] = true;
    }
    BlockPartition p{std::move(head), {}};
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!in_head[static_cast<std::size_t>(i)]) p.tail.push_back(i);
    }
    return p;
  }
};

enum class Pivot { head, tail };

namespace detail {

inline Eigen::FullPivLU<Matrix> invertible_lu(const Matrix& block) {
  Eigen::FullPivLU<Matrix> lu(block);
  if (!lu.isInvertible()) {
    const double pivot =
        lu.matrixLU().diagonal().size() > 0
            ? lu.matrixLU().diagonal().cwiseAbs().minCoeff()
            : 0.0;
    std::ostringstream msg;
    msg << "pivot block is singular (smallest pivot " << pivot << ")";
    throw SingularMatrixError(msg.str(), pivot);
  }
  return lu;
}

}  // namespace detail

/// Schur complement of the pivot block of M = [[A, B], [C, D]] (A = head
/// block, D = tail block): pivot head gives M/A = D - C A^-1 B, pivot tail
/// gives M/D = A - B D^-1 C.
inline Matrix schur_complement(const Matrix& m, const BlockPartition& part,
                               Pivot pivot) {
  detail::require_square(m, "matrix");
  part.validate(m.rows());
  const Matrix a = m(part.head, part.head);
  const Matrix b = m(part.head, part.tail);
  const Matrix c = m(part.tail, part.head);
  const Matrix d = m(part.tail, part.tail);
  if (pivot == Pivot::head) {
    return d - c * detail::invertible_lu(a).solve(b);
  }
  return a - b * detail::invertible_lu(d).solve(c);
}

/// The correction rho_{MA} with M^-1 = blockdiag(A^-1, 0) + rho_{MA}, for M
/// written in block order (head block A first). Works for any M whose head
/// block and Schur complement M/A are invertible.
inline Matrix rho_matrix(const Matrix& m, const BlockPartition& part) {
  detail::require_square(m, "matrix");
  part.validate(m.rows());
  const auto nh = static_cast<Eigen::Index>(part.head.size());
  const auto nt = static_cast<Eigen::Index>(part.tail.size());
  const Matrix a = m(part.head, part.head);
  const Matrix b = m(part.head, part.tail);
  const Matrix c = m(part.tail, part.head);
  const Matrix d = m(part.tail, part.tail);
  const auto a_lu = detail::invertible_lu(a);
  const Matrix ainv_b = a_lu.solve(b);
  const Matrix c_ainv =
      detail::invertible_lu(a.transpose()).solve(c.transpose()).transpose();
  const auto s_lu = detail::invertible_lu(d - c * ainv_b);
  const Matrix sinv = s_lu.inverse();
  Matrix rho(nh + nt, nh + nt);
  rho.topLeftCorner(nh, nh) = ainv_b * sinv * c_ainv;
  rho.topRightCorner(nh, nt) = -ainv_b * sinv;
  rho.bottomLeftCorner(nt, nh) = -sinv * c_ainv;
  rho.bottomRightCorner(nt, nt) = sinv;
  return rho;
}

namespace detail {

inline Vector scatter_to_canonical(const Vector& block_order_values,
                                   const IndexList& order) {
  Vector out(block_order_values.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out[order[k]] = block_order_values[static_cast<Eigen::Index>(k)];
  }
  return out;
}

}  // namespace detail

/// Weighting vector of X from the weighting vectors of a disjoint split
/// X = Y + Ybar:
///   w_X|Y    = (zeta_X / zeta_Ybar)^-1 (1 - zeta_{Y,Ybar} w_Ybar)
///   w_X|Ybar = (zeta_X / zeta_Y)^-1    (1 - zeta_{Ybar,Y} w_Y)
/// where zeta_X / zeta_Ybar is the Schur complement of the Ybar block.
inline WeightingVector weights_from_disjoint_parts(const SimilarityMatrix& zeta_x,
                                                   const BlockPartition& part,
                                                   const WeightingVector& w_y,
                                                   const WeightingVector& w_ybar) {
  const Matrix& z = zeta_x.zeta;
  detail::require_symmetric(z, "similarity matrix");
  part.validate(z.rows());
  if (w_y.size() != part.head.size() || w_ybar.size() != part.tail.size()) {
    throw InputError("part weighting vectors do not match the partition sizes");
  }
  const Matrix zy = z(part.head, part.head);
  const Matrix zybar = z(part.tail, part.tail);
  const Matrix cross = z(part.head, part.tail);

  const SpdFactorization fy(zy);
  const SpdFactorization fybar(zybar);
  const Matrix s_over_ybar = zy - cross * fybar.solve(cross.transpose());
  const Matrix s_over_y = zybar - cross.transpose() * fy.solve(cross);

  const auto nh = static_cast<Eigen::Index>(part.head.size());
  const auto nt = static_cast<Eigen::Index>(part.tail.size());
  Vector block(nh + nt);
  block.head(nh) = SpdFactorization(s_over_ybar)
                       .solve(Vector::Ones(nh) - cross * w_ybar.w);
  block.tail(nt) = SpdFactorization(s_over_y)
                       .solve(Vector::Ones(nt) - cross.transpose() * w_y.w);
  return weighting_from_solution(z, detail::scatter_to_canonical(block, part.order()));
}

/// Bookkeeping for extending a subset weighting to the whole space.
struct GluingCorrection {
  /// order[k] is the canonical index at block position k (head, then tail).
  IndexList order;
  /// rho_{XY} 1 in block order.
  Vector rho_one;
  /// 1^T rho_{XY} 1.
  double rho_sum = 0.0;
  /// rho_{XY} in block order; only formed when requested.
  std::optional<Matrix> rho;
};

struct ExtendOptions {
  bool materialize_rho = false;
};

/// w_X = P ([w_Y; 0] + rho_{XY} 1) and Mag(X) = Mag(Y) + 1^T rho_{XY} 1,
/// with Y the head block of the partition.
///
/// Conventions: rho is zero when Y = X, and when Y is empty rho is zeta_X^-1
/// so that the reconstruction M^-1 = blockdiag(A^-1, 0) + rho still holds.
inline std::pair<WeightingVector, GluingCorrection> extend_weighting_subset(
    const SimilarityMatrix& zeta_x, const BlockPartition& part,
    const WeightingVector& w_y, ExtendOptions opts = {}) {
  const Matrix& z = zeta_x.zeta;
  detail::require_symmetric(z, "similarity matrix");
  part.validate(z.rows(), /*allow_empty=*/true);
  if (w_y.size() != part.head.size()) {
    throw InputError("subset weighting vector does not match the head block");
  }
  const auto nh = static_cast<Eigen::Index>(part.head.size());
  const auto nt = static_cast<Eigen::Index>(part.tail.size());

  GluingCorrection corr;
  corr.order = part.order();
  Vector block = Vector::Zero(nh + nt);
  block.head(nh) = w_y.w;

  if (nt == 0) {
    corr.rho_one = Vector::Zero(nh);
    if (opts.materialize_rho) corr.rho = Matrix::Zero(nh, nh);
  } else if (nh == 0) {
    const Matrix zt = z(part.tail, part.tail);
    const SpdFactorization f(zt);
    corr.rho_one = f.solve(Vector::Ones(nt));
    if (opts.materialize_rho) corr.rho = f.inverse();
  } else {
    const Matrix a = z(part.head, part.head);
    const Matrix b = z(part.head, part.tail);
    const SpdFactorization fa(a);
    const Matrix ainv_b = fa.solve(b);
    const Matrix s = z(part.tail, part.tail) - b.transpose() * ainv_b;
    const SpdFactorization fs(s);
    const Vector u = fs.solve(Vector::Ones(nt) - b.transpose() * w_y.w);
    corr.rho_one.resize(nh + nt);
    corr.rho_one.head(nh) = -ainv_b * u;
    corr.rho_one.tail(nt) = u;
    if (opts.materialize_rho) {
      const Matrix sinv = fs.inverse();
      Matrix rho(nh + nt, nh + nt);
      rho.topLeftCorner(nh, nh) = ainv_b * sinv * ainv_b.transpose();
      rho.topRightCorner(nh, nt) = -ainv_b * sinv;
      rho.bottomLeftCorner(nt, nh) = -sinv * ainv_b.transpose();
      rho.bottomRightCorner(nt, nt) = sinv;
      corr.rho = std::move(rho);
    }
  }
  corr.rho_sum = corr.rho_one.sum();
  block += corr.rho_one;

  WeightingVector out = weighting_from_solution(
      z, detail::scatter_to_canonical(block, corr.order));
  out.magnitude = (nh > 0 ? w_y.magnitude : 0.0) + corr.rho_sum;
  return {std::move(out), std::move(corr)};
}

namespace detail {

/// Row indices of exact duplicate rows, grouped; empty when all rows differ.
inline std::vector<std::size_t> duplicate_rows(const Matrix& pts) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(pts.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      if (pts(a, k) != pts(b, k)) return pts(a, k) < pts(b, k);
    }
    return a < b;
  };
  std::sort(idx.begin(), idx.end(), less);
  std::vector<std::size_t> dups;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (pts.row(idx[i]) == pts.row(idx[i - 1])) {
      dups.push_back(static_cast<std::size_t>(idx[i - 1]));
      dups.push_back(static_cast<std::size_t>(idx[i]));
    }
  }
  std::sort(dups.begin(), dups.end());
  dups.erase(std::unique(dups.begin(), dups.end()), dups.end());
  return dups;
}

inline void require_distinct_rows(const Matrix& pts, const char* what) {
  const auto dups = duplicate_rows(pts);
  if (!dups.empty()) {
    std::ostringstream msg;
    msg << what << " contains coincident points at indices";
    for (std::size_t i : dups) msg << ' ' << i;
    throw DuplicatePointError(msg.str(), dups);
  }
}

}  // namespace detail

/// Result of gluing two clouds. Z lists X's points in order followed by the
/// points of Y that are not in X, in Y's order.
struct UnionWeighting {
  PointCloud points;
  WeightingVector weights;
  /// y_index[j] is the row of Z holding Y's j-th point.
  std::vector<Eigen::Index> y_index;
  /// Rows of Z that belong to both X and Y.
  IndexList intersection;
  double mag_x = 0.0;
  double mag_y = 0.0;
  double mag_intersection = 0.0;
  double rho_sum_x = 0.0;
  double rho_sum_y = 0.0;
  double rho_sum_intersection = 0.0;
};

/// Weighting vector of Z = X u Y by inclusion-exclusion:
///   w_Z = P_ZX([w_X;0] + rho_ZX 1) + P_ZY([w_Y;0] + rho_ZY 1)
///         - P_Z(XnY)([w_XnY;0] + rho_Z(XnY) 1)
/// Points are identified by exact coordinate equality.
inline UnionWeighting union_weighting(const PointCloud& x, const PointCloud& y,
                                      Scale t, Metric metric = Metric::l2) {
  if (x.dim() != y.dim()) throw InputError("clouds have different dimensions");
  detail::require_distinct_rows(x.points(), "first cloud");
  detail::require_distinct_rows(y.points(), "second cloud");

  using Key = std::vector<double>;
  auto key = [](const auto& row) { return Key(row.begin(), row.end()); };
  std::map<Key, Eigen::Index> position;
  const auto nx = static_cast<Eigen::Index>(x.size());
  for (Eigen::Index i = 0; i < nx; ++i) position.emplace(key(x.points().row(i)), i);

  UnionWeighting out;
  std::vector<Eigen::Index> extra;
  Eigen::Index next = nx;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(y.size()); ++j) {
    auto [it, inserted] = position.emplace(key(y.points().row(j)), next);
    if (inserted) {
      extra.push_back(j);
      ++next;
    } else {
      out.intersection.push_back(it->second);
    }
    out.y_index.push_back(it->second);
  }
  std::sort(out.intersection.begin(), out.intersection.end());

  Matrix z_pts(next, static_cast<Eigen::Index>(x.dim()));
  z_pts.topRows(nx) = x.points();
  for (std::size_t k = 0; k < extra.size(); ++k) {
    z_pts.row(nx + static_cast<Eigen::Index>(k)) = y.points().row(extra[k]);
  }
  out.points = PointCloud(std::move(z_pts));
  const SimilarityMatrix zeta =
      similarity_matrix(pairwise_distances(out.points, metric), t);

  auto term = [&](const IndexList& subset, double& mag, double& rho_sum) {
    WeightingVector w_sub;
    if (!subset.empty()) {
      w_sub = weighting_vector(SimilarityMatrix{zeta.zeta(subset, subset), zeta.t,
                                                zeta.source});
    } else {
      w_sub.w = Vector(0);
    }
    mag = w_sub.magnitude;
    auto [w, corr] = extend_weighting_subset(
        zeta, BlockPartition::with_head(next, subset), w_sub);
    rho_sum = corr.rho_sum;
    return w.w;
  };
  IndexList all_x(static_cast<std::size_t>(nx));
  std::iota(all_x.begin(), all_x.end(), Eigen::Index{0});
  IndexList all_y(out.y_index.begin(), out.y_index.end());

  const Vector wx = term(all_x, out.mag_x, out.rho_sum_x);
  const Vector wy = term(all_y, out.mag_y, out.rho_sum_y);
  const Vector wxy =
      term(out.intersection, out.mag_intersection, out.rho_sum_intersection);
  out.weights = weighting_from_solution(zeta.zeta, wx + wy - wxy);
  out.weights.magnitude = out.mag_x + out.mag_y - out.mag_intersection +
                          out.rho_sum_x + out.rho_sum_y - out.rho_sum_intersection;
  return out;
}

/// Cached inverse of zeta_Y for O(|Y|^2) single-point augmentation.
class AugmentCache {
 public:
  explicit AugmentCache(const SimilarityMatrix& zeta_y) {
    detail::require_symmetric(zeta_y.zeta, "similarity matrix");
    const SpdFactorization f(zeta_y.zeta);
    inverse_ = f.inverse();
    w_ = f.solve(Vector::Ones(zeta_y.zeta.rows()));
    residual_ = (zeta_y.zeta * w_ - Vector::Ones(w_.size())).cwiseAbs().maxCoeff();
  }

  const Matrix& inverse() const { return inverse_; }
  const Vector& weights() const { return w_; }
  double residual() const { return residual_; }
  Eigen::Index size() const { return w_.size(); }

 private:
  Matrix inverse_;
  Vector w_;
  double residual_ = 0.0;
};

struct Augmentation {
  /// Weighting vector of Y u {x}; x is the last entry.
  Vector w;
  double weight = 0.0;
  /// 1 - cross^T zeta_Y^-1 cross.
  double schur = 0.0;
};

namespace detail {

inline std::pair<Vector, double> augment_prepare(const AugmentCache& cache,
                                                 const Vector& cross) {
  if (cross.size() != cache.size()) {
    throw InputError("cross-similarity column has the wrong length");
  }
  Vector v = cache.inverse() * cross;
  const double schur = 1.0 - cross.dot(v);
  if (!(schur > pivot_tolerance(cache.size() + 1))) {
    std::ostringstream msg;
    msg << "augmented point coincides with a cached point (Schur scalar "
        << schur << ")";
    throw DegenerateAugmentationError(msg.str(), schur);
  }
  return {std::move(v), schur};
}

}  // namespace detail

/// Weight of a new point x in Y u {x} by 2x2 block inversion:
///   s = 1 - c^T zeta_Y^-1 c,  w_x = (1 - c^T w_Y) / s,
///   w_Y' = w_Y - (zeta_Y^-1 c) w_x.
inline Augmentation augment_one(const AugmentCache& cache, const Vector& cross) {
  auto [v, schur] = detail::augment_prepare(cache, cross);
  Augmentation out;
  out.schur = schur;
  out.weight = (1.0 - cross.dot(cache.weights())) / schur;
  out.w.resize(cache.size() + 1);
  out.w.head(cache.size()) = cache.weights() - v * out.weight;
  out.w[cache.size()] = out.weight;
  return out;
}

}  // namespace magkit
