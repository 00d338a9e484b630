#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "rtci/csv.hpp"
#include "rtci/error.hpp"
#include "rtci/synth.hpp"

namespace rtci {

Graph gen_erdos_renyi(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("Erdos-Renyi p must be in [0, 1]");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return Graph::from_edges(n, edges);
}

Graph gen_watts_strogatz(std::size_t n, std::size_t k_each_side, double p_rewire, Rng& rng) {
  if (k_each_side < 1 || 2 * k_each_side >= n) {
    throw UsageError("Watts-Strogatz needs 1 <= k_each_side < n/2");
  }
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0)) {
    throw UsageError("Watts-Strogatz rewiring probability must be in [0, 1]");
  }
  std::vector<std::set<NodeId>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j <= k_each_side; ++j) {
      const auto v = static_cast<NodeId>((i + j) % n);
      adj[i].insert(v);
      adj[v].insert(static_cast<NodeId>(i));
    }
  }
  // Rewire lattice edge (i, i+j) by redrawing its far endpoint.
  for (std::size_t j = 1; j <= k_each_side; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<NodeId>((i + j) % n);
      if (uniform01(rng) >= p_rewire) continue;
      if (adj[i].size() >= n - 1 || !adj[i].count(v)) continue;
      NodeId u;
      do {
        u = static_cast<NodeId>(uniform_index(rng, n));
      } while (u == i || adj[i].count(u));
      adj[i].erase(v);
      adj[v].erase(static_cast<NodeId>(i));
      adj[i].insert(u);
      adj[u].insert(static_cast<NodeId>(i));
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId v : adj[i]) {
      if (i < v) edges.emplace_back(static_cast<NodeId>(i), v);
    }
  }
  return Graph::from_edges(n, edges);
}

namespace {

// Fenwick tree over nonnegative weights supporting weighted sampling.
class WeightTree {
 public:
  explicit WeightTree(std::size_t n) : tree_(n + 1, 0.0), weight_(n, 0.0) {
    for (high_bit_ = 1; high_bit_ * 2 <= n; high_bit_ *= 2) {}
  }

  void set(std::size_t i, double w) {
    const double delta = w - weight_[i];
    weight_[i] = w;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }
  double weight(std::size_t i) const { return weight_[i]; }

  double total() const {
    double s = 0.0;
    for (std::size_t k = tree_.size() - 1; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  // Smallest index whose inclusive prefix sum exceeds u.
  std::size_t find(double u) const {
    std::size_t pos = 0;
    for (std::size_t step = high_bit_; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= u) {
        pos = next;
        u -= tree_[next];
      }
    }
    return std::min(pos, weight_.size() - 1);
  }

 private:
  std::vector<double> tree_;
  std::vector<double> weight_;
  std::size_t high_bit_ = 1;
};

}  // namespace

Graph gen_barabasi_albert(std::size_t n, double power, std::size_t m_per_node, Rng& rng) {
  if (!(power > 0.0)) throw UsageError("Barabasi-Albert power must be > 0");
  if (m_per_node < 1) throw UsageError("Barabasi-Albert m_per_node must be >= 1");
  const std::size_t seed_size = m_per_node + 1;
  if (n < seed_size) {
    throw UsageError("Barabasi-Albert needs n >= m_per_node + 1 for the seed clique");
  }
  std::vector<Edge> edges;
  edges.reserve(seed_size * m_per_node / 2 + (n - seed_size) * m_per_node);
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < seed_size; ++i) {
    for (std::size_t j = i + 1; j < seed_size; ++j) {
      edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
    degree[i] = m_per_node;
  }
  const auto attach_weight = [power](std::size_t d) {
    return power == 1.0 ? static_cast<double>(d) : std::pow(static_cast<double>(d), power);
  };
  WeightTree tree(n);
  for (std::size_t i = 0; i < seed_size; ++i) tree.set(i, attach_weight(degree[i]));

  std::vector<NodeId> targets;
  for (std::size_t v = seed_size; v < n; ++v) {
    targets.clear();
    // Sequential sampling without replacement: zero a chosen weight, restore after.
    while (targets.size() < m_per_node) {
      const double total = tree.total();
      const std::size_t pick = tree.find(uniform01(rng) * total);
      if (tree.weight(pick) <= 0.0) continue;
      targets.push_back(static_cast<NodeId>(pick));
      tree.set(pick, 0.0);
    }
    for (NodeId t : targets) {
      edges.emplace_back(static_cast<NodeId>(v), t);
      ++degree[t];
      tree.set(t, attach_weight(degree[t]));
    }
    degree[v] = m_per_node;
    tree.set(v, attach_weight(degree[v]));
  }
  return Graph::from_edges(n, edges);
}

std::string graph_model_name(const GraphModel& model) {
  struct Visitor {
    std::string operator()(const ErdosRenyi&) const { return "erdos_renyi"; }
    std::string operator()(const WattsStrogatz&) const { return "watts_strogatz"; }
    std::string operator()(const BarabasiAlbert&) const { return "barabasi_albert"; }
  };
  return std::visit(Visitor{}, model);
}

std::string graph_model_params(const GraphModel& model) {
  struct Visitor {
    std::string operator()(const ErdosRenyi& m) const {
      return "p=" + csv::format_double(m.p);
    }
    std::string operator()(const WattsStrogatz& m) const {
      return "k=" + std::to_string(m.k_each_side) + ";p_rewire=" + csv::format_double(m.p_rewire);
    }
    std::string operator()(const BarabasiAlbert& m) const {
      return "power=" + csv::format_double(m.power) + ";m=" + std::to_string(m.m_per_node);
    }
  };
  return std::visit(Visitor{}, model);
}

Graph generate_graph(const GraphModel& model, std::size_t n, Rng& rng) {
  struct Visitor {
    std::size_t n;
    Rng& rng;
    Graph operator()(const ErdosRenyi& m) const { return gen_erdos_renyi(n, m.p, rng); }
    Graph operator()(const WattsStrogatz& m) const {
      return gen_watts_strogatz(n, m.k_each_side, m.p_rewire, rng);
    }
    Graph operator()(const BarabasiAlbert& m) const {
      return gen_barabasi_albert(n, m.power, m.m_per_node, rng);
    }
  };
  return std::visit(Visitor{n, rng}, model);
}

}  // namespace rtci
