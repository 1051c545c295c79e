// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "magkit/active_learning.hpp"

namespace magkit {
namespace {

ALState fresh_state(std::size_t n, std::vector<std::size_t> labeled) {
  ALState s;
  s.labeled = labeled;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(labeled.begin(), labeled.end(), i) == labeled.end()) s.unlabeled.push_back(i);
  }
  return s;
}

// A classifier trained far from the pool, so the pool falls in one class.
Classifier far_classifier() {
  Matrix pts(2, 2);
  pts << 100, 0, 200, 0;
  return fit_classifier(pts, {0, 1});
}

TEST(Lssvm, SymmetricPairSplitsAtMidpoint) {
  Matrix pts(2, 2);
  pts << -1, 0, 1, 0;
  Vector y(2);
  y << 1, -1;
  const auto clf = lssvm_fit(pts, y);
  EXPECT_NEAR(clf.decision(Eigen::RowVector2d(0, 0))[0], 0.0, 1e-12);
  EXPECT_GT(clf.decision(Eigen::RowVector2d(-0.5, 0))[0], 0.0);
  EXPECT_LE(clf.residual, 1e-8);
}

TEST(Lssvm, LaplacianKernelUsesL1) {
  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 1, 2;
  EXPECT_DOUBLE_EQ(laplacian_kernel(a, b, 0.1)(0, 0), std::exp(-0.3));
}

TEST(Lssvm, SeparableBlobsTrainPerfectly) {
  const auto data = testing::two_blobs(40, 2, 8.0, 1);
  const auto clf = fit_classifier(data.x, data.y);
  EXPECT_EQ(clf.predict(data.x), data.y);
  EXPECT_LE(clf.machines[0].residual, 1e-8);
}

TEST(Lssvm, ConflictingDuplicatesFitWithRidge) {
  Matrix pts(3, 1);
  pts << 0, 0, 1;
  Vector y(3);
  y << 1, -1, 1;
  EXPECT_THROW(lssvm_fit(pts, y, 0.1, 0.0), NumericalError);
  const auto clf = lssvm_fit(pts, y, 0.1, 1e-3);
  EXPECT_TRUE(clf.weights.allFinite());
  const Vector train = clf.decision(pts);
  EXPECT_GT((train - y).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Lssvm, SingleClassIsRejected) {
  EXPECT_THROW(lssvm_fit(Matrix::Random(3, 2), Vector::Ones(3)), InputError);
}

TEST(QueryWeighting, OnePredictedClassGivesTwoQueries) {
  const auto data = testing::two_blobs(20, 2, 4.0, 2);
  const auto q = query_weighting(data.x, fresh_state(40, {}), far_classifier());
  EXPECT_EQ(q.size(), 2u);
  EXPECT_NE(q[0], q[1]);
}

TEST(QueryWeighting, SingleUnlabeledPoint) {
  const auto data = testing::two_blobs(5, 2, 4.0, 3);
  std::vector<std::size_t> lab(10);
  std::iota(lab.begin(), lab.end(), std::size_t{0});
  lab.erase(lab.begin() + 6);
  const auto q = query_weighting(data.x, fresh_state(10, lab), far_classifier());
  EXPECT_EQ(q, (std::vector<std::size_t>{6}));
}

TEST(QueryWeighting, NothingUnlabeledIsTheNoQuerySignal) {
  const auto data = testing::two_blobs(3, 2, 4.0, 3);
  const auto q = query_weighting(data.x, fresh_state(6, {0, 1, 2, 3, 4, 5}), far_classifier());
  EXPECT_TRUE(q.empty());
}

TEST(QueryWeighting, RingFixtureMatchesDirectWeighting) {
  const auto data = testing::ring_and_core(60, 40, 4);
  const auto q = query_weighting(data.x, fresh_state(100, {}), far_classifier());
  ASSERT_EQ(q.size(), 2u);
  const Vector w = weighting_vector(similarity_matrix(
                       pairwise_distances(PointCloud(data.x), Metric::l1), Scale{1.0}))
                       .w.cwiseAbs();
  Eigen::Index lo = 0, hi = 0;
  w.minCoeff(&lo);
  w.maxCoeff(&hi);
  EXPECT_EQ(q[0], static_cast<std::size_t>(lo));
  EXPECT_EQ(q[1], static_cast<std::size_t>(hi));
  EXPECT_EQ(data.y[q[0]], 0);
  EXPECT_EQ(data.y[q[1]], 1);
}

TEST(QueryWeighting, RingPointIsTheMaxQueryAcrossSeeds) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto data = testing::ring_and_core(60, 40, seed);
    const auto q = query_weighting(data.x, fresh_state(100, {}), far_classifier());
    hits += data.y[q.at(1)] == 1;
  }
  EXPECT_GE(hits, 95);
}

TEST(QueryWeighting, QueriesComeFromUnlabeledSet) {
  const auto data = testing::two_blobs(30, 2, 3.0, 5);
  const auto clf = fit_classifier(data.x(std::vector<Eigen::Index>{0, 30}, Eigen::all), {0, 1});
  Rng rng(5);
  std::vector<std::size_t> lab;
  for (std::size_t i = 0; i < 60; ++i) {
    if (rng.uniform() < 0.5) lab.push_back(i);
  }
  const auto state = fresh_state(60, lab);
  const auto q = query_weighting(data.x, state, clf);
  EXPECT_LE(q.size(), 4u);
  for (auto i : q) EXPECT_TRUE(state.is_unlabeled(i));
}

TEST(QueryUncertainty, SortsByConfidence) {
  Matrix pts(2, 1);
  pts << -1, 1;
  Vector y(2);
  y << -1, 1;
  Classifier clf{{0, 1}, {lssvm_fit(pts, y)}};
  const Vector f_at = clf.machines[0].decision(pts);
  ASSERT_LT(f_at[0], 0.0);
  // the decision is monotone in x between the two supports
  Matrix pool(5, 1);
  pool << 0.9, 0.1, 0.5, 0.05, 0.7;
  const auto q = query_uncertainty(pool, fresh_state(5, {}), clf, 4);
  EXPECT_EQ(q, (std::vector<std::size_t>{3, 1, 2, 4}));
  EXPECT_EQ(query_uncertainty(pool, fresh_state(5, {0, 1, 2}), clf, 4).size(), 2u);
}

TEST(QueryUncertainty, MatchesSortOracle) {
  const auto data = testing::two_blobs(50, 3, 2.0, 6);
  const auto d = testing::two_blobs(50, 3, 2.0, 7);
  const auto clf2 = fit_classifier(d.x, d.y);
  const auto state = fresh_state(100, {3, 50, 77});
  const Vector conf = clf2.confidence(data.x);
  std::vector<std::size_t> order = state.unlabeled;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return conf[static_cast<Eigen::Index>(a)] < conf[static_cast<Eigen::Index>(b)];
  });
  order.resize(4);
  EXPECT_EQ(query_uncertainty(data.x, state, clf2, 4), order);
}

TEST(RunAl, BookkeepingAndDeterminism) {
  const auto data = testing::two_blobs(60, 2, 3.0, 8);
  for (Strategy s : {Strategy::weighting, Strategy::uncertainty}) {
    const auto a = run_al(data.x, data.y, s, 30, 11);
    const auto b = run_al(data.x, data.y, s, 30, 11);
    ASSERT_EQ(a.state.curve.size(), b.state.curve.size());
    for (std::size_t i = 0; i < a.state.curve.size(); ++i) {
      EXPECT_EQ(a.state.curve[i].labels_spent, b.state.curve[i].labels_spent);
      EXPECT_EQ(a.state.curve[i].accuracy, b.state.curve[i].accuracy);
    }
    EXPECT_EQ(a.pool.rows() + a.test.rows(), 120);
    EXPECT_EQ(a.test.rows(), 39);
    std::set<std::size_t> all(a.state.labeled.begin(), a.state.labeled.end());
    EXPECT_EQ(all.size(), a.state.labeled.size());
    for (auto u : a.state.unlabeled) EXPECT_TRUE(all.insert(u).second);
    EXPECT_EQ(all.size(), static_cast<std::size_t>(a.pool.rows()));
    EXPECT_EQ(a.state.curve.front().labels_spent, 2u);
    EXPECT_LE(a.state.labeled.size(), 30u);
    for (std::size_t i = 1; i < a.state.curve.size(); ++i) {
      const auto step = a.state.curve[i].labels_spent - a.state.curve[i - 1].labels_spent;
      EXPECT_GE(step, 1u);
      EXPECT_LE(step, 4u);
    }
  }
}

TEST(RunAl, BudgetBelowInitialLabels) {
  const auto data = testing::two_blobs(20, 2, 3.0, 9);
  EXPECT_THROW(run_al(data.x, data.y, Strategy::weighting, 1, 0), InputError);
}

TEST(RunAl, ExhaustionEqualsFullFit) {
  const auto data = testing::two_blobs(20, 2, 1.5, 10);
  const auto run = run_al(data.x, data.y, Strategy::uncertainty, 1000, 3);
  EXPECT_TRUE(run.state.unlabeled.empty());
  const auto full = fit_classifier(run.pool, run.pool_labels);
  std::vector<Eigen::Index> rows(run.state.labeled.begin(), run.state.labeled.end());
  EXPECT_EQ(full.predict(run.test), run.classifier.predict(run.test));
  const Vector a = full.machines[0].decision(run.test);
  const Vector b = run.classifier.machines[0].decision(run.test);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RunAl, ThreeClassesUseOneVsRest) {
  testing::LabeledData data;
  data.x.resize(90, 2);
  Rng rng(12);
  for (int i = 0; i < 90; ++i) {
    const int c = i / 30;
    data.x(i, 0) = 4.0 * c + 0.5 * rng.normal();
    data.x(i, 1) = (c == 1 ? 4.0 : 0.0) + 0.5 * rng.normal();
    data.y.push_back(c);
  }
  const auto run = run_al(data.x, data.y, Strategy::weighting, 20, 1);
  EXPECT_EQ(run.classifier.machines.size(), 3u);
  EXPECT_EQ(run.state.curve.front().labels_spent, 3u);
  EXPECT_GE(run.state.curve.back().accuracy, 0.9);
}

TEST(RunAl, SeparableBlobsReachHighAccuracyQuickly) {
  for (Strategy s : {Strategy::weighting, Strategy::uncertainty}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto data = testing::two_blobs(100, 2, 6.0, seed);
      ALOptions opts;
      opts.max_iterations = 10;
      const auto run = run_al(data.x, data.y, s, 200, seed, opts);
      double best = 0.0;
      for (const auto& p : run.state.curve) best = std::max(best, p.accuracy);
      EXPECT_GE(best, 0.95) << "seed " << seed;
    }
  }
}

TEST(RunAl, WeightingKeepsUpWithUncertainty) {
  const std::vector<testing::LabeledData> fixtures = {
      testing::two_blobs(100, 2, 3.0, 1), testing::labeled_moons(200, 2),
      testing::ring_and_core(100, 100, 3)};
  int kept_up = 0;
  for (const auto& data : fixtures) {
    double mean[2] = {0.0, 0.0};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      int k = 0;
      for (Strategy s : {Strategy::weighting, Strategy::uncertainty}) {
        mean[k++] += run_al(data.x, data.y, s, 30, seed).state.curve.back().accuracy / 100.0;
      }
    }
    kept_up += mean[0] >= mean[1] - 0.02;
  }
  EXPECT_GE(kept_up, 2);
}

}  // namespace
}  // namespace magkit
