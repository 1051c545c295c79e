// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded point-cloud generators and independent oracles shared by the test
// suites. Nothing here calls into the factorization paths under test.

#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "magkit/random.hpp"

namespace magkit::testing {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix uniform_cloud(std::size_t n, std::size_t d, std::uint64_t seed,
                            double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rng.uniform(lo, hi);
  }
  return m;
}

inline Matrix gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed,
                             double sigma = 1.0) {
  Rng rng(seed);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = sigma * rng.normal();
  }
  return m;
}

/// n equispaced points on [lo, hi].
inline Matrix interval_grid(std::size_t n, double lo, double hi) {
  Matrix m(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i), 0) =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return m;
}

/// side x side lattice on [0, 1]^2, row-major.
inline Matrix square_grid(std::size_t side) {
  Matrix m(static_cast<Eigen::Index>(side * side), 2);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const auto r = static_cast<Eigen::Index>(i * side + j);
      m(r, 0) = static_cast<double>(i) / static_cast<double>(side - 1);
      m(r, 1) = static_cast<double>(j) / static_cast<double>(side - 1);
    }
  }
  return m;
}

/// Two interleaving half circles with Gaussian jitter.
inline Matrix moons(std::size_t n, std::uint64_t seed, double noise = 0.05) {
  Rng rng(seed);
  Matrix m(static_cast<Eigen::Index>(n), 2);
  const std::size_t upper = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (i < upper) {
      const double a = std::numbers::pi * static_cast<double>(i) /
                       static_cast<double>(std::max<std::size_t>(upper - 1, 1));
      m(r, 0) = std::cos(a);
      m(r, 1) = std::sin(a);
    } else {
      const std::size_t j = i - upper;
      const double a = std::numbers::pi * static_cast<double>(j) /
                       static_cast<double>(std::max<std::size_t>(n - upper - 1, 1));
      m(r, 0) = 1.0 - std::cos(a);
      m(r, 1) = 0.5 - std::sin(a);
    }
    m(r, 0) += noise * rng.normal();
    m(r, 1) += noise * rng.normal();
  }
  return m;
}

/// Two Gaussian blobs centered at -c and +c along every axis, labels 0 / 1.
struct LabeledData {
  Matrix x;
  std::vector<int> y;
};

inline LabeledData two_blobs(std::size_t per_class, std::size_t d, double separation,
                             std::uint64_t seed, double sigma = 1.0) {
  Rng rng(seed);
  LabeledData out;
  out.x.resize(static_cast<Eigen::Index>(2 * per_class), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    const double center = (cls == 0 ? -0.5 : 0.5) * separation;
    for (std::size_t k = 0; k < d; ++k) {
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          center + sigma * rng.normal();
    }
    out.y.push_back(cls);
  }
  return out;
}

/// Dense Gaussian core (label 0) inside a jittered ring of radius `radius`
/// (label 1).
inline LabeledData ring_and_core(std::size_t core, std::size_t ring, std::uint64_t seed,
                                 double radius = 3.0) {
  Rng rng(seed);
  LabeledData out;
  out.x.resize(static_cast<Eigen::Index>(core + ring), 2);
  for (std::size_t i = 0; i < core + ring; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (i < core) {
      out.x(r, 0) = 0.4 * rng.normal();
      out.x(r, 1) = 0.4 * rng.normal();
      out.y.push_back(0);
    } else {
      const double a = 2.0 * std::numbers::pi * rng.uniform();
      const double rr = radius + 0.1 * rng.normal();
      out.x(r, 0) = rr * std::cos(a);
      out.x(r, 1) = rr * std::sin(a);
      out.y.push_back(1);
    }
  }
  return out;
}

/// moons() with the half-circle index as the label.
inline LabeledData labeled_moons(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  LabeledData out;
  out.x = moons(n, seed, noise);
  for (std::size_t i = 0; i < n; ++i) out.y.push_back(i < n / 2 ? 0 : 1);
  return out;
}

/// Explicit inverse by full-pivot LU; the oracle for every factorization
/// path in the library (which uses Cholesky).
inline Matrix dense_inverse(const Matrix& m) { return Eigen::FullPivLU<Matrix>(m).inverse(); }

/// zeta = exp(-t d) for Euclidean distances, by scalar loops.
inline Matrix zeta_oracle(const Matrix& pts, double t) {
  const Eigen::Index n = pts.rows();
  Matrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < pts.cols(); ++k) {
        s += (pts(i, k) - pts(j, k)) * (pts(i, k) - pts(j, k));
      }
      z(i, j) = std::exp(-t * std::sqrt(s));
    }
  }
  return z;
}

/// Weighting vector from the explicit inverse.
inline Vector weights_oracle(const Matrix& pts, double t) {
  return dense_inverse(zeta_oracle(pts, t)) * Vector::Ones(pts.rows());
}

inline Matrix random_spd(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() + static_cast<double>(n) * Matrix::Identity(a.rows(), a.cols());
}

}  // namespace magkit::testing
