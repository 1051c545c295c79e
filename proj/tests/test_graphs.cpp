// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "magkit/approx.hpp"
#include "magkit/graphs.hpp"

namespace magkit {
namespace {

Graph path_graph(std::size_t n) {
  std::vector<Graph::Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph complete_graph(std::size_t n) {
  std::vector<Graph::Edge> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return Graph(n, e);
}

Graph connected_er(std::size_t n, double p, std::uint64_t seed) {
  for (;; ++seed) {
    Graph g = erdos_renyi(n, p, seed);
    if (g.components().size() == 1) return g;
  }
}

Matrix floyd_warshall(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d = Matrix::Constant(n, n, inf);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = 0.0;
  for (auto [u, v] : g.edges()) {
    d(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
    d(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  }
  return d;
}

TEST(Graph, RejectsMalformedEdges) {
  EXPECT_THROW(Graph(3, {{0, 0}}), InputError);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), InputError);
  EXPECT_THROW(Graph(3, {{0, 3}}), InputError);
}

TEST(ShortestPath, PathAndComplete) {
  EXPECT_EQ(shortest_path_metric(path_graph(3)).dist(0, 2), 2.0);
  const Matrix k = shortest_path_metric(complete_graph(6)).dist;
  EXPECT_EQ(k, Matrix::Ones(6, 6) - Matrix::Identity(6, 6));
}

TEST(ShortestPath, MatchesFloydWarshall) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = connected_er(30, 0.12, seed * 100);
    EXPECT_EQ(shortest_path_metric(g).dist, floyd_warshall(g));
  }
}

TEST(ShortestPath, DisconnectedGraphNamesComponents) {
  const Graph g(5, {{0, 1}, {2, 3}});
  try {
    shortest_path_metric(g);
    FAIL();
  } catch (const DisconnectedGraphError& e) {
    EXPECT_EQ(e.components().size(), 3u);
    EXPECT_EQ(e.components()[1], (std::vector<std::size_t>{2, 3}));
  }
  EXPECT_THROW(resistance_metric(g), DisconnectedGraphError);
}

TEST(Resistance, SmallCircuits) {
  EXPECT_NEAR(resistance_metric(path_graph(2)).dist(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(resistance_metric(path_graph(3)).dist(0, 2), 2.0, 1e-12);
  const Matrix tri = resistance_metric(complete_graph(3)).dist;
  EXPECT_NEAR(tri(0, 1), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(tri(1, 2), 2.0 / 3.0, 1e-12);
}

TEST(Resistance, PseudoinverseMatchesSvdOracle) {
  const Graph g = connected_er(20, 0.3, 1);
  const Eigen::JacobiSVD<Matrix> svd(laplacian(g), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector inv_s = svd.singularValues();
  for (Eigen::Index i = 0; i < inv_s.size(); ++i) inv_s[i] = inv_s[i] > 1e-9 ? 1.0 / inv_s[i] : 0.0;
  const Matrix oracle = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
  EXPECT_LE((laplacian_pseudoinverse(g) - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Resistance, NeverExceedsShortestPath) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(49);
    const Graph g = connected_er(n, rng.uniform(0.1, 0.6), seed * 1000);
    const Matrix r = resistance_metric(g).dist;
    const Matrix sp = shortest_path_metric(g).dist;
    EXPECT_TRUE(((r - sp).array() <= 1e-10).all()) << "seed " << seed;
  }
}

TEST(GraphWeighting, CompleteGraphClosedForm) {
  for (std::size_t n : {2u, 5u, 30u, 100u}) {
    for (double t : {0.5, 1.0, 2.0, 6.0}) {
      const auto gw = graph_weighting(complete_graph(n), GraphMetric::shortest_path, Scale{t});
      ASSERT_TRUE(gw.ok());
      const double q = std::exp(-t);
      const double nn = static_cast<double>(n);
      EXPECT_LE((gw.weights->w.array() - 1.0 / (1.0 + (nn - 1.0) * q)).abs().maxCoeff(), 1e-10);
      EXPECT_NEAR(gw.weights->magnitude, nn / (1.0 + (nn - 1.0) * q), 1e-10);
    }
  }
}

TEST(GraphWeighting, SingleNode) {
  const auto gw = graph_weighting(Graph(1, {}), GraphMetric::resistance, Scale{1.0});
  ASSERT_TRUE(gw.ok());
  EXPECT_EQ(gw.weights->w[0], 1.0);
}

TEST(GraphWeighting, ErdosRenyiWeightsFallWithDegree) {
  const Graph g = connected_er(50, 0.15, 2024);
  const auto gw = graph_weighting(g, GraphMetric::resistance, Scale{6.0});
  ASSERT_TRUE(gw.ok()) << gw.failure;
  Vector degree(50);
  for (std::size_t v = 0; v < 50; ++v) degree[static_cast<Eigen::Index>(v)] = static_cast<double>(g.degree(v));
  EXPECT_LT(spearman(degree, gw.weights->w), -0.8);
  EXPECT_FALSE(gw.scatter.is_scattered);
}

TEST(GraphWeighting, SingularShortestPathReportsFailure) {
  // K_{2,3}-like bipartite graphs make the hop-distance zeta singular at the
  // right scale; search small t for an indefinite example.
  const Graph g(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}});
  bool saw_failure = false;
  for (double t = 0.05; t < 2.0; t += 0.01) {
    const auto gw = graph_weighting(g, GraphMetric::shortest_path, Scale{t});
    if (!gw.ok()) {
      saw_failure = true;
      EXPECT_FALSE(gw.failure.empty());
      EXPECT_GT(gw.suggested_t, gw.scatter.t_required);
      EXPECT_TRUE(graph_weighting(g, GraphMetric::shortest_path, Scale{gw.suggested_t}).ok());
    }
  }
  EXPECT_TRUE(saw_failure);
}

TEST(GraphWeighting, ScatteredScalesSatisfyKdeBound) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = connected_er(30, 0.2, seed * 31);
    for (GraphMetric m : {GraphMetric::shortest_path, GraphMetric::resistance}) {
      const auto probe = graph_weighting(g, m, Scale{1.0});
      const auto gw = graph_weighting(g, m, Scale{probe.suggested_t});
      ASSERT_TRUE(gw.ok());
      ASSERT_TRUE(gw.scatter.is_scattered);
      const DistanceMatrix d = m == GraphMetric::resistance ? resistance_metric(g)
                                                            : shortest_path_metric(g);
      const auto z = similarity_matrix(d, Scale{probe.suggested_t});
      EXPECT_LE((gw.weights->w - weight_approx_kde(z)).cwiseAbs().maxCoeff(), *gw.scatter.bound);
    }
  }
}

TEST(Spearman, KnownValues) {
  Vector a(5), b(5);
  a << 1, 2, 3, 4, 5;
  b << 5, 6, 7, 8, 7;
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, -a), -1.0);
  // midranks of b: 1 2 3.5 5 3.5
  EXPECT_NEAR(spearman(a, b), 0.8207826816681233, 1e-12);
}

}  // namespace
}  // namespace magkit
