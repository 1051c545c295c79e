// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/kdtree.hpp"
#include "magkit/metric.hpp"
#include "magkit/parallel.hpp"

namespace magkit {

/// Whether tX is scattered, i.e. exp(-t eps) < 1/(n - 1), and the resulting
/// bound on |w(x) - 1/(n f(x))|.
struct ScatterReport {
  bool is_scattered = false;
  /// Smallest distance between distinct points of the unscaled space.
  std::optional<double> eps_min;
  std::size_t n = 0;
  double t = 1.0;
  /// log(n - 1) / eps_min: scales above this make the space scattered.
  double t_required = 0.0;
  /// Right-hand side of the kernel-density error bound; empty when the space
  /// is not scattered and the bound does not apply.
  std::optional<double> bound;
};

/// Error bound for a scattered space with n points and scaled minimum
/// distance eps:
///   (n (n-1)^2 e^{-2 eps} + n (n-1) e^{-eps}) / (1 - (n-1) e^{-eps}).
inline double kde_error_bound(std::size_t n, double scaled_eps) {
  const double nn = static_cast<double>(n);
  const double q = std::exp(-scaled_eps);
  return (nn * (nn - 1.0) * (nn - 1.0) * q * q + nn * (nn - 1.0) * q) /
         (1.0 - (nn - 1.0) * q);
}

inline ScatterReport scatter_report(const DistanceMatrix& dist, Scale t) {
  ScatterReport r;
  r.n = dist.size();
  r.t = t.value();
  r.eps_min = dist.eps_min;
  if (r.n <= 1) {
    r.is_scattered = true;
    r.bound = 0.0;
    return r;
  }
  const double eps = *dist.eps_min;
  const double nm1 = static_cast<double>(r.n - 1);
  if (eps <= 0.0) {
    r.t_required = std::numeric_limits<double>::infinity();
    return r;
  }
  r.t_required = std::log(nm1) / eps;
  const double scaled = t.value() * eps;
  r.is_scattered = std::exp(-scaled) < 1.0 / nm1;
  if (r.is_scattered) r.bound = kde_error_bound(r.n, scaled);
  return r;
}

enum class DensityKind { laplacian_kde, rect_count, rect_count_unnormalized };

/// Neighborhood shape for the counting estimator.
enum class CountBall { linf, l2 };

struct DensityEstimate {
  Vector f;
  DensityKind kind = DensityKind::laplacian_kde;
  /// Box half-width (or ball radius) for counting estimators.
  std::optional<double> h;
  /// Neighbor counts including the point itself, for counting estimators.
  std::vector<std::size_t> counts;
};

/// f = row means of zeta, self term included.
inline DensityEstimate kde_laplacian(const SimilarityMatrix& zeta) {
  DensityEstimate d;
  d.f = zeta.zeta.rowwise().mean();
  d.kind = DensityKind::laplacian_kde;
  return d;
}

/// 1 / (n f) entrywise.
inline Vector weight_approx_kde(const SimilarityMatrix& zeta) {
  const double n = static_cast<double>(zeta.size());
  return (n * kde_laplacian(zeta).f.array()).inverse().matrix();
}

inline double neighborhood_volume(CountBall ball, double h, std::size_t d) {
  const double dd = static_cast<double>(d);
  if (ball == CountBall::linf) return std::pow(2.0 * h, dd);
  return std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0) *
         std::pow(h, dd);
}

/// Neighbor counts |R_h(x) n X| for every x in the cloud (self included).
inline std::vector<std::size_t> neighbor_counts(const PointCloud& cloud, double h,
                                                CountBall ball = CountBall::linf) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("h must be positive");
  const KdTree tree(cloud.points());
  std::vector<std::size_t> counts(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    counts[i] = ball == CountBall::linf ? tree.count_linf(cloud.row(i), h)
                                        : tree.count_l2(cloud.row(i), h);
  });
  return counts;
}

/// f~(x) = |R_h(x) n X| / (n vol(R_h)), where R_h is the L-infinity box of
/// half-width h (a cube of side 2h) by default.
inline DensityEstimate rect_count_density(const PointCloud& cloud, double h,
                                          CountBall ball = CountBall::linf) {
  DensityEstimate d;
  d.kind = DensityKind::rect_count;
  d.h = h;
  d.counts = neighbor_counts(cloud, h, ball);
  const double denom =
      static_cast<double>(cloud.size()) * neighborhood_volume(ball, h, cloud.dim());
  d.f.resize(static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    d.f[static_cast<Eigen::Index>(i)] = static_cast<double>(d.counts[i]) / denom;
  }
  return d;
}

/// Counting approximation of the weighting vector: vol(R_h) / count when
/// normalized, 1 / count otherwise.
inline Vector weight_approx_rect(const PointCloud& cloud, double h, bool normalized,
                                 CountBall ball = CountBall::linf) {
  const auto counts = neighbor_counts(cloud, h, ball);
  const double numer = normalized ? neighborhood_volume(ball, h, cloud.dim()) : 1.0;
  Vector w(static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] = numer / static_cast<double>(counts[i]);
  }
  return w;
}

struct NeumannInverse {
  Matrix inverse;
  /// (n - 1) times the largest off-diagonal similarity.
  double ratio = 0.0;
  /// n r^{k+1} / (1 - r): bound on the entrywise truncation error.
  double truncation_bound = 0.0;
};

/// Partial sum sum_{k <= k_max} (-1)^k (zeta - I)^k of the path-sum series
/// for zeta^-1. The (a, b) entry of (zeta - I)^k is the sum over walks
/// a = a_0 != a_1 != ... != a_k = b of the products of similarities, which
/// is at most r^k with r = (n - 1) max_{a != b} zeta(a, b). The series is
/// only summed when r < 1.
inline NeumannInverse neumann_inverse(const SimilarityMatrix& zeta, int k_max) {
  if (k_max < 0) throw UsageError("k_max must be nonnegative");
  const Matrix& z = zeta.zeta;
  const Eigen::Index n = z.rows();
  NeumannInverse out;
  const Matrix off = z - Matrix::Identity(n, n);
  double max_off = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) max_off = std::max(max_off, std::abs(z(i, j)));
    }
  }
  out.ratio = static_cast<double>(n - 1) * max_off;
  if (n > 1 && !(out.ratio < 1.0)) {
    std::ostringstream msg;
    msg << "space is not scattered (ratio " << out.ratio
        << " >= 1); the series need not converge";
    throw NumericalError(msg.str());
  }
  out.inverse = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= k_max; ++k) {
    term = -(off * term);
    out.inverse += term;
  }
  out.truncation_bound = static_cast<double>(n) * std::pow(out.ratio, k_max + 1) /
                         (1.0 - out.ratio);
  return out;
}

}  // namespace magkit
