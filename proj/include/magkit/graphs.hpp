// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "magkit/approx.hpp"
#include "magkit/error.hpp"
#include "magkit/metric.hpp"
#include "magkit/random.hpp"
#include "magkit/weighting.hpp"

namespace magkit {

/// Simple undirected, unweighted graph.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph(std::size_t node_count, const std::vector<Edge>& edges)
      : adjacency_(node_count) {
    std::set<Edge> seen;
    for (auto [u, v] : edges) {
      if (u >= node_count || v >= node_count) {
        throw InputError("edge endpoint out of range");
      }
      if (u == v) throw InputError("self-loops are not allowed");
      const Edge key{std::min(u, v), std::max(u, v)};
      if (!seen.insert(key).second) throw InputError("parallel edges are not allowed");
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
      edges_.push_back(key);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  }

  std::size_t node_count() const { return adjacency_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }

  /// Connected components, each sorted, ordered by smallest member.
  std::vector<std::vector<std::size_t>> components() const {
    std::vector<int> label(node_count(), -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < node_count(); ++s) {
      if (label[s] >= 0) continue;
      out.emplace_back();
      std::queue<std::size_t> q;
      q.push(s);
      label[s] = static_cast<int>(out.size() - 1);
      while (!q.empty()) {
        const auto v = q.front();
        q.pop();
        out.back().push_back(v);
        for (auto u : adjacency_[v]) {
          if (label[u] < 0) {
            label[u] = label[s];
            q.push(u);
          }
        }
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }

  /// Throws DisconnectedGraphError naming the components.
  void require_connected() const {
    if (node_count() == 0) throw InputError("graph has no nodes");
    auto comps = components();
    if (comps.size() > 1) {
      std::ostringstream msg;
      msg << "graph is disconnected with " << comps.size() << " components:";
      for (const auto& c : comps) {
        msg << " {";
        for (std::size_t i = 0; i < c.size(); ++i) msg << (i ? "," : "") << c[i];
        msg << '}';
      }
      throw DisconnectedGraphError(msg.str(), std::move(comps));
    }
  }

 private:
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Edge> edges_;
};

/// G(n, p) random graph.
inline Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Graph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return Graph(n, edges);
}

/// All-pairs hop distances by breadth-first search from every node.
inline DistanceMatrix shortest_path_metric(const Graph& g) {
  g.require_connected();
  const auto n = g.node_count();
  Matrix dist = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<long> hops(n, -1);
    std::queue<std::size_t> q;
    hops[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto u : g.neighbors(v)) {
        if (hops[u] < 0) {
          hops[u] = hops[v] + 1;
          q.push(u);
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      dist(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(v)) =
          static_cast<double>(hops[v]);
    }
  }
  return DistanceMatrix::from_matrix(std::move(dist));
}

inline Matrix laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix lap = Matrix::Zero(n, n);
  for (auto [u, v] : g.edges()) {
    const auto a = static_cast<Eigen::Index>(u);
    const auto b = static_cast<Eigen::Index>(v);
    lap(a, a) += 1.0;
    lap(b, b) += 1.0;
    lap(a, b) -= 1.0;
    lap(b, a) -= 1.0;
  }
  return lap;
}

/// Moore-Penrose pseudoinverse of a connected graph's Laplacian. The
/// Laplacian is invertible on the complement of the all-ones vector, so
/// L+ = (L + J/n)^-1 - J/n.
inline Matrix laplacian_pseudoinverse(const Graph& g) {
  g.require_connected();
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const Matrix j = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const SpdFactorization f(laplacian(g) + j);
  return f.inverse() - j;
}

/// Effective resistance r(i, j) = L+_ii + L+_jj - 2 L+_ij with unit
/// resistors on every edge.
inline DistanceMatrix resistance_metric(const Graph& g) {
  const Matrix lp = laplacian_pseudoinverse(g);
  const auto n = lp.rows();
  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i; k < n; ++k) {
      const double r = i == k ? 0.0 : std::max(0.0, lp(i, i) + lp(k, k) - 2.0 * lp(i, k));
      dist(i, k) = r;
      dist(k, i) = r;
    }
  }
  return DistanceMatrix::from_matrix(std::move(dist));
}

enum class GraphMetric { shortest_path, resistance };

inline GraphMetric parse_graph_metric(const std::string& name) {
  if (name == "shortest_path" || name == "shortest-path" || name == "sp") {
    return GraphMetric::shortest_path;
  }
  if (name == "resistance") return GraphMetric::resistance;
  throw UsageError("unknown graph metric '" + name +
                   "' (expected shortest_path or resistance)");
}

/// Either a weighting vector or a typed explanation of why none was found.
struct GraphWeighting {
  std::optional<WeightingVector> weights;
  ScatterReport scatter;
  /// Present when the solve failed.
  std::string failure;
  /// A scale at which the graph is scattered, hence zeta invertible.
  double suggested_t = 0.0;

  bool ok() const { return weights.has_value(); }
};

inline GraphWeighting graph_weighting(const Graph& g, GraphMetric metric, Scale t) {
  const DistanceMatrix dist =
      metric == GraphMetric::resistance ? resistance_metric(g) : shortest_path_metric(g);
  GraphWeighting out;
  out.scatter = scatter_report(dist, t);
  // strictly above the threshold, so the suggestion is itself scattered
  out.suggested_t = std::max(t.value(), 1.01 * out.scatter.t_required);
  try {
    out.weights = weighting_vector(similarity_matrix(dist, t, SimilaritySource::graph));
  } catch (const NumericalError& e) {
    out.failure = e.what();
  }
  return out;
}

/// Spearman rank correlation with midranks for ties.
inline double spearman(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InputError("spearman needs two equal-length samples of size >= 2");
  }
  auto ranks = [](const Vector& v) {
    const auto n = static_cast<std::size_t>(v.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return v[static_cast<Eigen::Index>(x)] < v[static_cast<Eigen::Index>(y)];
    });
    Vector r(v.size());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && v[static_cast<Eigen::Index>(order[j])] ==
                          v[static_cast<Eigen::Index>(order[i])]) {
        ++j;
      }
      for (std::size_t m = i; m < j; ++m) {
        r[static_cast<Eigen::Index>(order[m])] = 0.5 * static_cast<double>(i + j - 1);
      }
      i = j;
    }
    return r;
  };
  const Vector ra = ranks(a);
  const Vector rb = ranks(b);
  const Vector ca = ra.array() - ra.mean();
  const Vector cb = rb.array() - rb.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return 0.0;
  return ca.dot(cb) / denom;
}

}  // namespace magkit
