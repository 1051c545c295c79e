// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/metric.hpp"
#include "magkit/parallel.hpp"

namespace magkit {

/// Solution w of zeta w = 1 and its sum, the magnitude.
struct WeightingVector {
  Vector w;
  double magnitude = 0.0;
  /// max_i |(zeta w - 1)_i| of the returned solution.
  double residual = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(w.size()); }
};

namespace detail {

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw InputError(std::string(what) + " must be square and nonempty");
  }
}

inline void require_symmetric(const Matrix& m, const char* what) {
  require_square(m, what);
  // elementwise, so no n x n temporary is formed
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (!(std::abs(m(i, j) - m(j, i)) <= tol)) {
        throw InputError(std::string(what) + " must be symmetric");
      }
    }
  }
}

inline double pivot_tolerance(Eigen::Index n) {
  return static_cast<double>(std::max<Eigen::Index>(n, 16)) *
         std::numeric_limits<double>::epsilon();
}

}  // namespace detail

/// Cholesky factorization of a symmetric positive-definite matrix that
/// refuses numerically singular input.
///
/// A factorization "succeeds" only if every squared pivot exceeds
/// max(n, 16) * machine epsilon times the largest diagonal entry. Coincident
/// points make zeta exactly singular, and in floating point that shows up as
/// a pivot at rounding level rather than as a hard failure.
class SpdFactorization {
 public:
  SpdFactorization() = default;

  explicit SpdFactorization(const Matrix& m) { compute(m); }

  void compute(const Matrix& m) {
    detail::require_square(m, "matrix");
    llt_.compute(m);
    const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    if (llt_.info() != Eigen::Success) {
      Eigen::LDLT<Matrix> ldlt(m);
      const double pivot = ldlt.info() == Eigen::Success
                               ? ldlt.vectorD().minCoeff()
                               : -std::numeric_limits<double>::infinity();
      std::ostringstream msg;
      msg << "matrix is not positive definite (smallest pivot " << pivot << ")";
      throw SingularMatrixError(msg.str(), pivot);
    }
    const Matrix& lower = llt_.matrixLLT();
    smallest_pivot_ = lower.diagonal().array().square().minCoeff();
    if (smallest_pivot_ <= detail::pivot_tolerance(m.rows()) * scale) {
      std::ostringstream msg;
      msg << "matrix is numerically singular (smallest pivot " << smallest_pivot_
          << ")";
      throw SingularMatrixError(msg.str(), smallest_pivot_);
    }
  }

  template <typename Rhs>
  auto solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return llt_.solve(rhs);
  }

  Matrix inverse() const {
    const Eigen::Index n = llt_.matrixLLT().rows();
    return llt_.solve(Matrix::Identity(n, n));
  }

  double smallest_pivot() const { return smallest_pivot_; }
  Eigen::Index size() const { return llt_.matrixLLT().rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
  double smallest_pivot_ = 0.0;
};

inline WeightingVector weighting_from_solution(const Matrix& zeta, Vector w) {
  WeightingVector out;
  out.residual = (zeta * w - Vector::Ones(w.size())).cwiseAbs().maxCoeff();
  out.magnitude = w.sum();
  out.w = std::move(w);
  return out;
}

/// Weighting vector via an SPD factorization of zeta; never forms the
/// inverse. Throws SingularMatrixError when zeta is not positive definite.
inline WeightingVector weighting_vector(const SimilarityMatrix& zeta) {
  detail::require_symmetric(zeta.zeta, "similarity matrix");
  const SpdFactorization factor(zeta.zeta);
  Vector w = factor.solve(Vector::Ones(zeta.zeta.rows()));
  return weighting_from_solution(zeta.zeta, std::move(w));
}

inline double magnitude(const SimilarityMatrix& zeta) {
  return weighting_vector(zeta).magnitude;
}

/// Samples of t -> Mag(tX). A missing value marks a grid point where the
/// solve failed or its residual exceeded the tolerance.
struct MagnitudeSeries {
  std::vector<double> ts;
  std::vector<std::optional<double>> mags;

  std::size_t gap_count() const {
    return static_cast<std::size_t>(
        std::count_if(mags.begin(), mags.end(), [](const auto& m) { return !m; }));
  }
};

struct MagnitudeFunctionOptions {
  double residual_tolerance = 1e-8;
};

inline MagnitudeSeries magnitude_function(const DistanceMatrix& dist,
                                          const std::vector<double>& ts,
                                          MagnitudeFunctionOptions opts = {}) {
  if (ts.empty()) throw InputError("magnitude function needs at least one scale");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Scale{ts[i]};
    if (i > 0 && !(ts[i] > ts[i - 1])) {
      throw InputError("scale grid must be strictly increasing");
    }
  }
  MagnitudeSeries series{ts, std::vector<std::optional<double>>(ts.size())};
  parallel_for(ts.size(), [&](std::size_t i) {
    try {
      const auto wv = weighting_vector(similarity_matrix(dist, Scale{ts[i]}));
      if (std::isfinite(wv.magnitude) && wv.residual <= opts.residual_tolerance) {
        series.mags[i] = wv.magnitude;
      }
    } catch (const NumericalError&) {
      // recorded as a gap
    }
  });
  if (series.gap_count() == ts.size()) {
    throw NumericalError("magnitude could not be computed at any requested scale");
  }
  return series;
}

/// Geometric grid from t_min to t_max with the given number of points per
/// decade. t_max is included when it falls on the grid.
inline std::vector<double> log_grid(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0.0) || !(t_max >= t_min) || per_decade < 1) {
    throw UsageError("log grid needs 0 < t_min <= t_max and per_decade >= 1");
  }
  const double decades = std::log10(t_max / t_min);
  const auto steps = static_cast<long>(std::floor(decades * per_decade + 1e-9));
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    ts.push_back(t_min * std::pow(10.0, static_cast<double>(k) / per_decade));
  }
  return ts;
}

/// || min(zeta u - (1 + gamma) 1, 0) ||_1, the one-class SVM objective with
/// the similarity matrix as kernel. Zero exactly when zeta u >= (1 + gamma).
inline double svm_objective(const SimilarityMatrix& zeta, const Vector& u,
                            double gamma) {
  if (u.size() != zeta.zeta.rows()) throw InputError("u has the wrong length");
  const Vector margin = zeta.zeta * u - Vector::Constant(u.size(), 1.0 + gamma);
  return margin.cwiseMin(0.0).cwiseAbs().sum();
}

struct BoundaryProfile {
  /// Coefficient of variation (population stdev / |mean|) of interior weights.
  double interior_cv = 0.0;
  /// min over boundary weights divided by max over interior weights.
  double boundary_min_over_interior_max = 0.0;
};

/// Summarizes how weight concentrates on the boundary. interior_mask[i] is
/// true for interior points and false for boundary points.
inline BoundaryProfile boundary_profile(const Vector& w,
                                        const std::vector<bool>& interior_mask) {
  if (interior_mask.size() != static_cast<std::size_t>(w.size())) {
    throw InputError("mask length does not match the weighting vector");
  }
  std::vector<double> interior;
  std::vector<double> boundary;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    (interior_mask[static_cast<std::size_t>(i)] ? interior : boundary).push_back(w[i]);
  }
  if (interior.empty() || boundary.empty()) {
    throw InputError("boundary profile needs both interior and boundary points");
  }
  const double n = static_cast<double>(interior.size());
  const double mean = std::accumulate(interior.begin(), interior.end(), 0.0) / n;
  double var = 0.0;
  for (double v : interior) var += (v - mean) * (v - mean);
  var /= n;
  BoundaryProfile p;
  p.interior_cv = var == 0.0 ? 0.0 : std::sqrt(var) / std::abs(mean);
  p.boundary_min_over_interior_max =
      *std::min_element(boundary.begin(), boundary.end()) /
      *std::max_element(interior.begin(), interior.end());
  return p;
}

}  // namespace magkit
