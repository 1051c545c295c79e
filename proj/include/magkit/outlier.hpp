// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/gluing.hpp"
#include "magkit/metric.hpp"
#include "magkit/parallel.hpp"
#include "magkit/random.hpp"
#include "magkit/weighting.hpp"

namespace magkit {

struct OutlierFitOptions {
  /// Inliers beyond this count are subsampled uniformly without replacement.
  std::size_t max_train = 1000;
  Metric metric = Metric::l2;
  /// Largest accepted max-norm residual of zeta w = 1 on the training set.
  double residual_tolerance = 1e-8;
  std::size_t k = 10;
};

/// Fitted weighting-score detector. Immutable after fit; scoring is
/// thread-safe.
struct OutlierModel {
  Standardizer standardizer;
  /// Standardized retained inliers, one per row.
  Matrix train;
  /// Rows of the original inlier set that were retained, ascending.
  std::vector<std::size_t> retained;
  double t = 1.0;
  Metric metric = Metric::l2;
  std::size_t k = 10;
  AugmentCache cache;
};

/// Fits the normalizer on all inliers, retains at most max_train of them and
/// caches the inverse of their similarity matrix.
inline OutlierModel fit(const PointCloud& inliers, Scale t, std::uint64_t seed,
                        OutlierFitOptions opts = {}) {
  if (inliers.size() < 2) {
    throw InsufficientDataError("outlier model needs at least two inliers");
  }
  Standardizer standardizer = fit_standardizer(inliers.points());

  std::vector<std::size_t> retained(inliers.size());
  std::iota(retained.begin(), retained.end(), std::size_t{0});
  if (inliers.size() > opts.max_train) {
    Rng rng(seed);
    rng.shuffle(retained);
    retained.resize(opts.max_train);
    std::sort(retained.begin(), retained.end());
  }
  Matrix raw(static_cast<Eigen::Index>(retained.size()),
             static_cast<Eigen::Index>(inliers.dim()));
  for (std::size_t i = 0; i < retained.size(); ++i) {
    raw.row(static_cast<Eigen::Index>(i)) = inliers.row(retained[i]);
  }
  Matrix train = standardizer.apply(raw);

  const auto dups = detail::duplicate_rows(train);
  if (!dups.empty()) {
    std::ostringstream msg;
    msg << "similarity matrix is singular: coincident standardized inliers at";
    std::vector<std::size_t> original;
    for (std::size_t i : dups) {
      original.push_back(retained[i]);
      msg << ' ' << retained[i];
    }
    throw CoincidentPointsError(msg.str(), std::move(original));
  }

  const SimilarityMatrix zeta =
      similarity_matrix(pairwise_distances(PointCloud(train), opts.metric), t);
  AugmentCache cache(zeta);
  if (!(cache.residual() <= opts.residual_tolerance)) {
    std::ostringstream msg;
    msg << "training similarity matrix is too ill-conditioned at t = " << t.value()
        << " (residual " << cache.residual() << ")";
    throw NumericalError(msg.str());
  }
  return OutlierModel{std::move(standardizer), std::move(train), std::move(retained),
                      t.value(),               opts.metric,     opts.k,
                      std::move(cache)};
}

/// Weighting score of x: its weight in Phi(Y u {x}), by single-point
/// augmentation of the cached inverse.
inline double score(const OutlierModel& model,
                    const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::RowVectorXd z = model.standardizer.apply_point(x);
  Vector cross(model.train.rows());
  for (Eigen::Index i = 0; i < model.train.rows(); ++i) {
    cross[i] = std::exp(-model.t * point_distance(z, model.train.row(i), model.metric));
  }
  auto [v, schur] = detail::augment_prepare(model.cache, cross);
  return (1.0 - cross.dot(model.cache.weights())) / schur;
}

inline Vector score_batch(const OutlierModel& model, const Matrix& points) {
  Vector out(points.rows());
  parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
    out[static_cast<Eigen::Index>(i)] =
        score(model, points.row(static_cast<Eigen::Index>(i)));
  });
  return out;
}

/// Flags exactly the k largest scores; ties at the k-th value go to the
/// lower index.
inline std::vector<bool> classify_topk(const Vector& scores, std::size_t k) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (k > n) throw InputError("k exceeds the batch size");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  std::vector<bool> flagged(n, false);
  for (std::size_t i = 0; i < k; ++i) flagged[order[i]] = true;
  return flagged;
}

/// P(score of a random outlier > score of a random inlier), ties counted 1/2,
/// computed from midranks in O(n log n).
inline double auc(const Vector& scores, const std::vector<bool>& labels) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (labels.size() != n) throw InputError("scores and labels differ in length");
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) {
    throw InputError("AUC is undefined unless both classes are present");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)];
  });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[static_cast<Eigen::Index>(order[j])] ==
                        scores[static_cast<Eigen::Index>(order[i])]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (labels[order[m]]) rank_sum += midrank;
    }
    i = j;
  }
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

struct EvalMetrics {
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  double f1_at_k = 0.0;
  double auc = 0.0;
  std::size_t k = 0;
};

/// labels[i] is true for outliers.
inline EvalMetrics evaluate(const Vector& scores, const std::vector<bool>& labels,
                            std::size_t k) {
  if (labels.size() != static_cast<std::size_t>(scores.size())) {
    throw InputError("scores and labels differ in length");
  }
  EvalMetrics m;
  m.k = k;
  m.auc = auc(scores, labels);
  const auto flagged = classify_topk(scores, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (flagged[i] && labels[i]) ++hits;
  }
  const auto positives = std::count(labels.begin(), labels.end(), true);
  m.precision_at_k = k == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(k);
  m.recall_at_k = static_cast<double>(hits) / static_cast<double>(positives);
  const double denom = m.precision_at_k + m.recall_at_k;
  m.f1_at_k = denom == 0.0 ? 0.0 : 2.0 * m.precision_at_k * m.recall_at_k / denom;
  return m;
}

/// {1e j, 5e j : -5 <= j <= 1}, ascending.
inline std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int j = -5; j <= 1; ++j) {
    const double base = std::pow(10.0, j);
    grid.push_back(base);
    grid.push_back(5.0 * base);
  }
  return grid;
}

struct TGridPoint {
  double t = 0.0;
  /// Empty when the model could not be fitted at this scale.
  std::optional<double> validation_auc;
};

struct TSearchResult {
  double best_t = 0.0;
  double best_auc = 0.0;
  std::vector<TGridPoint> grid;
};

/// Fits one model per grid scale on the training inliers, scores the
/// validation batch and keeps the scale with the largest AUC (ties go to the
/// smaller t).
inline TSearchResult t_search(const PointCloud& train, const Matrix& validation,
                              const std::vector<bool>& validation_labels,
                              const std::vector<double>& grid, std::uint64_t seed,
                              OutlierFitOptions opts = {}) {
  if (grid.empty()) throw InputError("t grid is empty");
  if (validation_labels.size() != static_cast<std::size_t>(validation.rows())) {
    throw InputError("validation points and labels differ in length");
  }
  const auto pos = std::count(validation_labels.begin(), validation_labels.end(), true);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(validation_labels.size())) {
    throw InputError("validation set needs both inliers and outliers");
  }
  TSearchResult result;
  result.grid.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    result.grid[i].t = grid[i];
    try {
      const OutlierModel model = fit(train, Scale{grid[i]}, seed, opts);
      result.grid[i].validation_auc =
          auc(score_batch(model, validation), validation_labels);
    } catch (const NumericalError&) {
      // unusable scale, left empty
    }
  });
  bool found = false;
  for (const auto& g : result.grid) {
    if (!g.validation_auc) continue;
    const double a = *g.validation_auc;
    if (!found || a > result.best_auc || (a == result.best_auc && g.t < result.best_t)) {
      result.best_t = g.t;
      result.best_auc = a;
      found = true;
    }
  }
  if (!found) throw NumericalError("no scale in the t grid produced a usable model");
  return result;
}

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
};

struct DatasetSplit {
  Matrix train;
  Matrix validation;
  std::vector<bool> validation_labels;
  Matrix test;
  std::vector<bool> test_labels;
  /// False when no outliers were supplied; the positive sets are then empty.
  bool has_outliers = false;
};

/// Shuffles the inliers into train/validation/test and sends each outlier to
/// validation or test with probability 1/2.
inline DatasetSplit split_dataset(const Matrix& inliers, const Matrix& outliers,
                                  std::uint64_t seed, SplitRatios ratios = {}) {
  if (inliers.rows() == 0) throw InputError("no inliers to split");
  if (outliers.rows() > 0 && outliers.cols() != inliers.cols()) {
    throw InputError("inliers and outliers differ in dimension");
  }
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(inliers.rows());
  const auto perm = rng.permutation(n);
  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto n_val =
      static_cast<std::size_t>(std::floor(ratios.validation * static_cast<double>(n)));

  std::vector<Eigen::Index> train_rows, val_rows, test_rows, val_out, test_out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(perm[i]);
    (i < n_train ? train_rows : i < n_train + n_val ? val_rows : test_rows).push_back(row);
  }
  for (Eigen::Index j = 0; j < outliers.rows(); ++j) {
    (rng.coin() ? val_out : test_out).push_back(j);
  }

  auto stack = [&](const std::vector<Eigen::Index>& in_rows,
                   const std::vector<Eigen::Index>& out_rows, std::vector<bool>& labels) {
    Matrix m(static_cast<Eigen::Index>(in_rows.size() + out_rows.size()), inliers.cols());
    Eigen::Index r = 0;
    for (auto i : in_rows) m.row(r++) = inliers.row(i);
    for (auto j : out_rows) m.row(r++) = outliers.row(j);
    labels.assign(in_rows.size(), false);
    labels.resize(in_rows.size() + out_rows.size(), true);
    return m;
  };
  DatasetSplit split;
  split.train = inliers(train_rows, Eigen::all);
  split.validation = stack(val_rows, val_out, split.validation_labels);
  split.test = stack(test_rows, test_out, split.test_labels);
  split.has_outliers = outliers.rows() > 0;
  return split;
}

struct OutlierExperiment {
  TSearchResult search;
  EvalMetrics test;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
};

/// Split, search t on the validation set, then report top-k metrics on the
/// test set with the selected scale.
inline OutlierExperiment run_outlier_experiment(const Matrix& inliers,
                                                const Matrix& outliers,
                                                const std::vector<double>& grid,
                                                std::uint64_t seed,
                                                OutlierFitOptions opts = {},
                                                SplitRatios ratios = {}) {
  const DatasetSplit split = split_dataset(inliers, outliers, seed, ratios);
  if (!split.has_outliers) throw InputError("no labeled outliers supplied");
  const PointCloud train(split.train);
  OutlierExperiment out;
  out.train_size = static_cast<std::size_t>(split.train.rows());
  out.validation_size = static_cast<std::size_t>(split.validation.rows());
  out.test_size = static_cast<std::size_t>(split.test.rows());
  out.search = t_search(train, split.validation, split.validation_labels, grid, seed, opts);
  const OutlierModel model = fit(train, Scale{out.search.best_t}, seed, opts);
  out.test = evaluate(score_batch(model, split.test), split.test_labels,
                      std::min(opts.k, static_cast<std::size_t>(split.test.rows())));
  return out;
}

}  // namespace magkit
