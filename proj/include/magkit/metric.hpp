// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "magkit/error.hpp"
#include "magkit/parallel.hpp"

namespace magkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Metric { l1, l2, linf };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::l1:
      return "l1";
    case Metric::l2:
      return "l2";
    case Metric::linf:
      return "linf";
  }
  return "l2";
}

inline Metric parse_metric(const std::string& name) {
  if (name == "l1" || name == "L1") return Metric::l1;
  if (name == "l2" || name == "L2") return Metric::l2;
  if (name == "linf" || name == "Linf" || name == "LINF") return Metric::linf;
  throw UsageError("unknown metric '" + name + "' (expected l1, l2 or linf)");
}

/// n points in R^d stored as the rows of an n x d matrix.
class PointCloud {
 public:
  PointCloud() = default;

  explicit PointCloud(Matrix points) : points_(std::move(points)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
      throw InputError("point cloud needs at least one point and one dimension");
    }
    if (!points_.allFinite()) {
      throw InputError("point cloud has non-finite coordinates");
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const Matrix& points() const { return points_; }
  auto row(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

 private:
  Matrix points_;
};

/// Scale parameter t > 0 applied multiplicatively to every distance.
class Scale {
 public:
  explicit Scale(double t) : t_(t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw InputError("scale parameter must be positive and finite");
    }
  }
  double value() const { return t_; }

 private:
  double t_;
};

inline double point_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                             const Eigen::Ref<const Eigen::RowVectorXd>& b,
                             Metric metric) {
  double acc = 0.0;
  switch (metric) {
    case Metric::l1:
      for (Eigen::Index k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
      return acc;
    case Metric::l2:
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
      }
      return std::sqrt(acc);
    case Metric::linf:
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        acc = std::max(acc, std::abs(a[k] - b[k]));
      }
      return acc;
  }
  return acc;
}

/// Dense symmetric distance matrix together with its smallest off-diagonal
/// entry. eps_min is empty for a single point.
struct DistanceMatrix {
  Matrix dist;
  std::optional<double> eps_min;

  std::size_t size() const { return static_cast<std::size_t>(dist.rows()); }
  bool has_duplicates() const { return eps_min && *eps_min == 0.0; }

  /// Validates a caller-supplied matrix and fills eps_min.
  static DistanceMatrix from_matrix(Matrix dist) {
    if (dist.rows() < 1 || dist.rows() != dist.cols()) {
      throw InputError("distance matrix must be square and nonempty");
    }
    if (!dist.allFinite()) throw InputError("distance matrix has non-finite entries");
    const Eigen::Index n = dist.rows();
    std::optional<double> eps;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist(i, i) != 0.0) throw InputError("distance matrix diagonal must be zero");
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (dist(i, j) < 0.0 || dist(i, j) != dist(j, i)) {
          throw InputError("distance matrix must be symmetric and nonnegative");
        }
        eps = eps ? std::min(*eps, dist(i, j)) : dist(i, j);
      }
    }
    return DistanceMatrix{std::move(dist), eps};
  }
};

/// All-pairs distances under the chosen metric. Rows are filled in parallel;
/// each entry is computed once and mirrored, so the result does not depend on
/// the thread count.
inline DistanceMatrix pairwise_distances(const PointCloud& cloud,
                                         Metric metric = Metric::l2) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  Matrix dist = Matrix::Zero(n, n);
  const Matrix& pts = cloud.points();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = point_distance(pts.row(i), pts.row(j), metric);
    }
  });
  std::optional<double> eps;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(j, i) = dist(i, j);
      eps = eps ? std::min(*eps, dist(i, j)) : dist(i, j);
    }
  }
  return DistanceMatrix{std::move(dist), eps};
}

enum class SimilaritySource { euclidean, graph, raw };

/// zeta(i, j) = exp(-t d(i, j)).
struct SimilarityMatrix {
  Matrix zeta;
  double t = 1.0;
  SimilaritySource source = SimilaritySource::raw;

  std::size_t size() const { return static_cast<std::size_t>(zeta.rows()); }

  /// Wraps an arbitrary symmetric unit-diagonal matrix.
  static SimilarityMatrix raw(Matrix zeta) {
    if (zeta.rows() < 1 || zeta.rows() != zeta.cols()) {
      throw InputError("similarity matrix must be square and nonempty");
    }
    return SimilarityMatrix{std::move(zeta), 1.0, SimilaritySource::raw};
  }
};

inline SimilarityMatrix similarity_matrix(
    const DistanceMatrix& dist, Scale t,
    SimilaritySource source = SimilaritySource::euclidean) {
  const double scale = t.value();
  Matrix zeta = (-scale * dist.dist.array()).exp().matrix();
  return SimilarityMatrix{std::move(zeta), scale, source};
}

/// Cross-similarity between the rows of a and the rows of b.
inline Matrix cross_similarity(const Matrix& a, const Matrix& b, Scale t,
                               Metric metric = Metric::l2) {
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::exp(-t.value() * point_distance(a.row(i), b.row(j), metric));
    }
  }
  return out;
}

/// Per-feature affine normalizer x -> (x - mean) / stdev.
///
/// The standard deviation uses the population (divide-by-n) convention.
/// Zero-variance features keep stdev = 1, so they are only centered.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stdev;

  Matrix apply(const Matrix& x) const {
    check_dim(x);
    return (x.rowwise() - mean).array().rowwise() / stdev.array();
  }
  Eigen::RowVectorXd apply_point(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != mean.size()) throw InputError("point dimension mismatch");
    return ((x - mean).array() / stdev.array()).matrix();
  }
  Matrix invert(const Matrix& z) const {
    check_dim(z);
    return (z.array().rowwise() * stdev.array()).matrix().rowwise() + mean;
  }

 private:
  void check_dim(const Matrix& x) const {
    if (x.cols() != mean.size()) throw InputError("point dimension mismatch");
  }
};

inline Standardizer fit_standardizer(const Matrix& points) {
  if (points.rows() < 2) {
    throw InsufficientDataError("standardization needs at least two points");
  }
  const double n = static_cast<double>(points.rows());
  Standardizer s;
  s.mean = points.colwise().mean();
  const Matrix centered = points.rowwise() - s.mean;
  s.stdev = (centered.array().square().colwise().sum() / n).sqrt().matrix();
  for (Eigen::Index k = 0; k < s.stdev.size(); ++k) {
    // relative floor: a column that is constant up to rounding is constant
    const double scale = std::max(1.0, std::abs(s.mean[k]));
    if (!(s.stdev[k] > 1e-12 * scale)) s.stdev[k] = 1.0;
  }
  return s;
}

inline std::pair<PointCloud, Standardizer> standardize(const PointCloud& cloud) {
  Standardizer s = fit_standardizer(cloud.points());
  return {PointCloud(s.apply(cloud.points())), std::move(s)};
}

}  // namespace magkit
