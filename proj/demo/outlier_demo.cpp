// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

// Weighting-score outlier detection on a Gaussian blob with a few far points.

#include <cmath>
#include <cstdio>

#include "magkit/magkit.hpp"

int main() {
  magkit::Rng rng(3);
  magkit::Matrix inliers(300, 2);
  for (Eigen::Index i = 0; i < inliers.rows(); ++i) {
    inliers(i, 0) = rng.normal();
    inliers(i, 1) = rng.normal();
  }
  magkit::Matrix outliers(12, 2);
  for (Eigen::Index i = 0; i < outliers.rows(); ++i) {
    const double a = rng.uniform(0.0, 6.283185307179586);
    const double r = rng.uniform(5.0, 8.0);
    outliers(i, 0) = r * std::cos(a);
    outliers(i, 1) = r * std::sin(a);
  }

  const auto result =
      magkit::run_outlier_experiment(inliers, outliers, magkit::default_t_grid(), 7);
  std::printf("%10s %14s\n", "t", "validation AUC");
  for (const auto& g : result.search.grid) {
    if (g.validation_auc) {
      std::printf("%10.0e %14.4f\n", g.t, *g.validation_auc);
    } else {
      std::printf("%10.0e %14s\n", g.t, "(no fit)");
    }
  }
  std::printf("\nselected t = %g\n", result.search.best_t);
  std::printf("test: AUC %.4f  precision@%zu %.2f  recall@%zu %.2f\n", result.test.auc,
              result.test.k, result.test.precision_at_k, result.test.k,
              result.test.recall_at_k);
}
