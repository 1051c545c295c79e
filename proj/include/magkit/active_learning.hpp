// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/metric.hpp"
#include "magkit/parallel.hpp"
#include "magkit/random.hpp"
#include "magkit/weighting.hpp"

namespace magkit {

/// exp(-gamma ||x - y||_1)
inline Matrix laplacian_kernel(const Matrix& a, const Matrix& b, double gamma) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = std::exp(-gamma * point_distance(a.row(i), b.row(j), Metric::l1));
    }
  }
  return k;
}

/// Kernel ridge (least-squares SVM) classifier f(x) = K(x, L)^T w - w0.
struct LssvmClassifier {
  Matrix support;
  Vector weights;
  double bias = 0.0;
  double kernel_gamma = 0.1;
  double ridge = 1e-8;
  /// Max-norm residual of the solved linear system.
  double residual = 0.0;

  Vector decision(const Matrix& x) const {
    return laplacian_kernel(x, support, kernel_gamma) * weights -
           Vector::Constant(x.rows(), bias);
  }
};

/// Solves
///   [ K + ridge I   -1 ] [ w  ]   [ y ]
///   [ -1^T           0 ] [ w0 ] = [ 0 ]
/// i.e. K w - w0 = y - ridge w with the weights summing to zero.
inline LssvmClassifier lssvm_fit(const Matrix& points, const Vector& y,
                                 double gamma = 0.1, double ridge = 1e-8) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw InsufficientDataError("LS-SVM needs at least two labeled points");
  if (y.size() != n) throw InputError("labels and points differ in length");
  if (!((y.array() == 1.0) || (y.array() == -1.0)).all()) {
    throw InputError("LS-SVM labels must be +1 or -1");
  }
  if ((y.array() > 0).all() || (y.array() < 0).all()) {
    throw InputError("LS-SVM needs both classes among the labeled points");
  }
  if (ridge < 0.0) throw InputError("ridge must be nonnegative");

  Matrix system = Matrix::Zero(n + 1, n + 1);
  system.topLeftCorner(n, n) =
      laplacian_kernel(points, points, gamma) + ridge * Matrix::Identity(n, n);
  system.topRightCorner(n, 1).setConstant(-1.0);
  system.bottomLeftCorner(1, n).setConstant(-1.0);
  Vector rhs = Vector::Zero(n + 1);
  rhs.head(n) = y;

  const Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) {
    throw NumericalError(
        "LS-SVM system is singular (coincident points?); retry with ridge > 0");
  }
  const Vector sol = lu.solve(rhs);
  LssvmClassifier clf;
  clf.support = points;
  clf.weights = sol.head(n);
  clf.bias = sol[n];
  clf.kernel_gamma = gamma;
  clf.ridge = ridge;
  clf.residual = (system * sol - rhs).cwiseAbs().maxCoeff();
  return clf;
}

/// One machine for two classes, one-vs-rest otherwise. Class ids are the
/// sorted distinct labels of the training set.
struct Classifier {
  std::vector<int> classes;
  std::vector<LssvmClassifier> machines;

  /// Scores per class (columns follow `classes`).
  Matrix scores(const Matrix& x) const {
    Matrix s(x.rows(), static_cast<Eigen::Index>(classes.size()));
    if (classes.size() == 2) {
      const Vector f = machines[0].decision(x);
      s.col(0) = -f;
      s.col(1) = f;
    } else {
      for (std::size_t c = 0; c < machines.size(); ++c) {
        s.col(static_cast<Eigen::Index>(c)) = machines[c].decision(x);
      }
    }
    return s;
  }

  /// Predicted class position (index into `classes`) per row.
  std::vector<std::size_t> predict_index(const Matrix& x) const {
    const Matrix s = scores(x);
    std::vector<std::size_t> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < s.cols(); ++c) {
        if (s(i, c) > s(i, best)) best = c;
      }
      out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out;
    for (auto c : predict_index(x)) out.push_back(classes[c]);
    return out;
  }

  /// |f(x)| for two classes; gap between the two best class scores otherwise.
  Vector confidence(const Matrix& x) const {
    if (classes.size() == 2) return machines[0].decision(x).cwiseAbs();
    const Matrix s = scores(x);
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::vector<double> row(s.row(i).begin(), s.row(i).end());
      std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
      out[i] = row[0] - row[1];
    }
    return out;
  }
};

inline Classifier fit_classifier(const Matrix& points, const std::vector<int>& labels,
                                 double gamma = 0.1, double ridge = 1e-8) {
  Classifier clf;
  clf.classes.assign(labels.begin(), labels.end());
  std::sort(clf.classes.begin(), clf.classes.end());
  clf.classes.erase(std::unique(clf.classes.begin(), clf.classes.end()),
                    clf.classes.end());
  if (clf.classes.size() < 2) {
    throw InputError("classifier needs at least two classes among the labels");
  }
  auto one_vs = [&](int positive) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] = labels[i] == positive ? 1.0 : -1.0;
    }
    return lssvm_fit(points, y, gamma, ridge);
  };
  if (clf.classes.size() == 2) {
    clf.machines.push_back(one_vs(clf.classes[1]));
  } else {
    for (int c : clf.classes) clf.machines.push_back(one_vs(c));
  }
  return clf;
}

struct CurvePoint {
  std::size_t labels_spent = 0;
  double accuracy = 0.0;
};

/// Labeled and unlabeled pool indices plus the learning curve so far.
struct ALState {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<CurvePoint> curve;

  bool is_unlabeled(std::size_t i) const {
    return std::binary_search(unlabeled.begin(), unlabeled.end(), i);
  }

  /// Moves the given pool indices from U to L. Indices already labeled are
  /// ignored. Returns the number of labels granted.
  std::size_t grant(const std::vector<std::size_t>& queries) {
    std::size_t granted = 0;
    for (auto q : queries) {
      auto it = std::lower_bound(unlabeled.begin(), unlabeled.end(), q);
      if (it == unlabeled.end() || *it != q) continue;
      unlabeled.erase(it);
      labeled.push_back(q);
      ++granted;
    }
    return granted;
  }
};

struct QueryOptions {
  /// Scale of the similarity matrix used for the query-side weighting.
  double t = 1.0;
  Metric metric = Metric::l1;
  /// At most this many queries per iteration.
  std::size_t max_queries = 4;
};

/// Weighting-vector query: partitions the pool by predicted class, computes
/// each part's weighting vector and, per class, picks the unlabeled points
/// with the smallest and the largest |w|. Duplicates are dropped. An empty
/// result means no predicted class holds an unlabeled point.
inline std::vector<std::size_t> query_weighting(const Matrix& pool,
                                                const ALState& state,
                                                const Classifier& clf,
                                                QueryOptions opts = {}) {
  const auto predicted = clf.predict_index(pool);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < clf.classes.size(); ++c) {
    std::vector<Eigen::Index> members;
    bool any_unlabeled = false;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (predicted[i] != c) continue;
      members.push_back(static_cast<Eigen::Index>(i));
      any_unlabeled = any_unlabeled || state.is_unlabeled(i);
    }
    if (!any_unlabeled) continue;
    const PointCloud part(pool(members, Eigen::all));
    const Vector w =
        weighting_vector(similarity_matrix(pairwise_distances(part, opts.metric),
                                           Scale{opts.t}))
            .w.cwiseAbs();
    std::ptrdiff_t lo = -1;
    std::ptrdiff_t hi = -1;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (!state.is_unlabeled(static_cast<std::size_t>(members[m]))) continue;
      const auto mi = static_cast<Eigen::Index>(m);
      if (lo < 0 || w[mi] < w[lo]) lo = mi;
      if (hi < 0 || w[mi] > w[hi]) hi = mi;
    }
    for (auto pick : {lo, hi}) {
      const auto idx = static_cast<std::size_t>(members[static_cast<std::size_t>(pick)]);
      if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
    }
  }
  if (out.size() > opts.max_queries) out.resize(opts.max_queries);
  return out;
}

/// Uncertainty sampling: the unlabeled points with the smallest confidence
/// (|f(x)| in the binary case), ties broken by index.
inline std::vector<std::size_t> query_uncertainty(const Matrix& pool,
                                                  const ALState& state,
                                                  const Classifier& clf,
                                                  std::size_t count = 4) {
  std::vector<std::size_t> candidates = state.unlabeled;
  const Matrix x = pool(std::vector<Eigen::Index>(candidates.begin(), candidates.end()),
                        Eigen::all);
  const Vector conf = clf.confidence(x);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return conf[static_cast<Eigen::Index>(a)] < conf[static_cast<Eigen::Index>(b)];
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i) {
    out.push_back(candidates[order[i]]);
  }
  return out;
}

enum class Strategy { weighting, uncertainty };

inline Strategy parse_strategy(const std::string& name) {
  if (name == "weighting") return Strategy::weighting;
  if (name == "uncertainty") return Strategy::uncertainty;
  throw UsageError("unknown strategy '" + name + "' (expected weighting or uncertainty)");
}

struct ALOptions {
  double kernel_gamma = 0.1;
  double ridge = 1e-8;
  double query_t = 1.0;
  std::size_t queries_per_iteration = 4;
  double test_fraction = 0.33;
  /// Stop after this many query rounds even if budget remains (0 = no cap).
  std::size_t max_iterations = 0;
};

struct ALRun {
  ALState state;
  Classifier classifier;
  /// Standardized pool and test points.
  Matrix pool;
  Matrix test;
  std::vector<int> pool_labels;
  std::vector<int> test_labels;
};

/// Seeded pool-based active learning. The data are split into a training
/// pool and a held-out test set, standardized on the pool, seeded with one
/// labeled point per class, then grown by `strategy` until `budget` labels
/// (initial ones included) are spent or the pool is exhausted. The curve
/// records test accuracy after every fit.
inline ALRun run_al(const Matrix& data, const std::vector<int>& labels,
                    Strategy strategy, std::size_t budget, std::uint64_t seed,
                    ALOptions opts = {}) {
  if (labels.size() != static_cast<std::size_t>(data.rows())) {
    throw InputError("labels and points differ in length");
  }
  Rng rng(seed);
  const auto n = labels.size();
  const auto perm = rng.permutation(n);
  const auto n_test =
      static_cast<std::size_t>(std::floor(opts.test_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> pool_rows, test_rows;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_test ? test_rows : pool_rows).push_back(static_cast<Eigen::Index>(perm[i]));
  }
  if (pool_rows.size() < 2 || test_rows.empty()) {
    throw InsufficientDataError("too few points for a pool/test split");
  }

  ALRun run;
  const Standardizer standardizer = fit_standardizer(data(pool_rows, Eigen::all));
  run.pool = standardizer.apply(data(pool_rows, Eigen::all));
  run.test = standardizer.apply(data(test_rows, Eigen::all));
  for (auto r : pool_rows) run.pool_labels.push_back(labels[static_cast<std::size_t>(r)]);
  for (auto r : test_rows) run.test_labels.push_back(labels[static_cast<std::size_t>(r)]);

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < run.pool_labels.size(); ++i) {
    by_class[run.pool_labels[i]].push_back(i);
  }
  if (by_class.size() < 2) throw InputError("training pool holds a single class");
  if (budget < by_class.size()) {
    std::ostringstream msg;
    msg << "budget " << budget << " is smaller than the " << by_class.size()
        << " initial labels";
    throw InputError(msg.str());
  }

  ALState& state = run.state;
  for (auto& [cls, members] : by_class) {
    state.labeled.push_back(members[rng.index(members.size())]);
  }
  for (std::size_t i = 0; i < run.pool_labels.size(); ++i) {
    if (std::find(state.labeled.begin(), state.labeled.end(), i) == state.labeled.end()) {
      state.unlabeled.push_back(i);
    }
  }

  auto refit = [&] {
    std::vector<int> y;
    for (auto i : state.labeled) y.push_back(run.pool_labels[i]);
    const std::vector<Eigen::Index> rows(state.labeled.begin(), state.labeled.end());
    run.classifier = fit_classifier(run.pool(rows, Eigen::all), y,
                                    opts.kernel_gamma, opts.ridge);
    const auto pred = run.classifier.predict(run.test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == run.test_labels[i];
    state.curve.push_back(
        {state.labeled.size(), static_cast<double>(correct) / static_cast<double>(pred.size())});
  };
  refit();

  std::size_t iteration = 0;
  while (state.labeled.size() < budget && !state.unlabeled.empty()) {
    if (opts.max_iterations > 0 && iteration >= opts.max_iterations) break;
    const std::size_t room =
        std::min(opts.queries_per_iteration, budget - state.labeled.size());
    std::vector<std::size_t> queries;
    if (strategy == Strategy::weighting) {
      queries = query_weighting(run.pool, state, run.classifier,
                                QueryOptions{opts.query_t, Metric::l1, room});
    } else {
      queries = query_uncertainty(run.pool, state, run.classifier, room);
    }
    if (queries.empty() || state.grant(queries) == 0) break;
    refit();
    ++iteration;
  }
  return run;
}

struct CurveSummary {
  std::size_t iteration = 0;
  double mean_labels = 0.0;
  double mean_accuracy = 0.0;
  double stdev_accuracy = 0.0;
  std::size_t runs = 0;
};

/// Runs one experiment per seed (seed_base, seed_base + 1, ...) and averages
/// the curves per iteration over the runs that reached it.
inline std::vector<CurveSummary> run_al_experiment(const Matrix& data,
                                                   const std::vector<int>& labels,
                                                   Strategy strategy, std::size_t budget,
                                                   std::size_t seeds,
                                                   std::uint64_t seed_base,
                                                   ALOptions opts = {}) {
  std::vector<std::vector<CurvePoint>> curves(seeds);
  parallel_for(seeds, [&](std::size_t s) {
    curves[s] = run_al(data, labels, strategy, budget, seed_base + s, opts).state.curve;
  });
  std::size_t longest = 0;
  for (const auto& c : curves) longest = std::max(longest, c.size());
  std::vector<CurveSummary> out;
  for (std::size_t it = 0; it < longest; ++it) {
    CurveSummary row;
    row.iteration = it;
    std::vector<double> acc;
    for (const auto& c : curves) {
      if (it >= c.size()) continue;
      acc.push_back(c[it].accuracy);
      row.mean_labels += static_cast<double>(c[it].labels_spent);
    }
    row.runs = acc.size();
    const double m = static_cast<double>(acc.size());
    row.mean_labels /= m;
    row.mean_accuracy = std::accumulate(acc.begin(), acc.end(), 0.0) / m;
    double var = 0.0;
    for (double a : acc) var += (a - row.mean_accuracy) * (a - row.mean_accuracy);
    row.stdev_accuracy = std::sqrt(var / m);
    out.push_back(row);
  }
  return out;
}

}  // namespace magkit
