#pragma once

// Shared fixtures and naive reference implementations for the tests.

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtci/graph.hpp"
#include "rtci/types.hpp"

namespace testing {

using rtci::Edge;
using rtci::Graph;
using rtci::NodeId;
using rtci::Panel;

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph::from_edges(n, e);
}

inline Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (coin(rng)) e.push_back({i, j});
    }
  }
  return Graph::from_edges(n, e);
}

inline Panel random_panel(std::size_t n, std::size_t t, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  std::vector<double> v(n * t);
  for (auto& x : v) x = z(rng);
  return Panel(n, t, std::move(v));
}

inline Eigen::MatrixXd dense_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [u, v] : g.edge_list()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

inline Eigen::MatrixXd dense_panel(const Panel& p) {
  Eigen::MatrixXd m(p.num_nodes(), p.num_steps());
  for (std::size_t i = 0; i < p.num_nodes(); ++i) {
    for (std::size_t t = 0; t < p.num_steps(); ++t) m(i, t) = p(i, t);
  }
  return m;
}

// All-pairs hop distances; -1 when unreachable.
inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [u, v] : g.edge_list()) d[u][v] = d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  for (auto& row : d) {
    for (auto& x : row) {
      if (x >= inf) x = -1;
    }
  }
  return d;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
