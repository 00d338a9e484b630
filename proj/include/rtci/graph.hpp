#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtci/types.hpp"

namespace rtci {

using Edge = std::pair<NodeId, NodeId>;

struct GraphBuildStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_collapsed = 0;
};

/// Immutable undirected graph in compressed (CSR) adjacency form. Neighbor
/// lists are sorted, free of self-loops and duplicates, and symmetric.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph on `n` nodes from any edge list. Edges are symmetrized;
  /// self-loops are dropped and repeated edges collapsed (counted in `stats`).
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          GraphBuildStats* stats = nullptr);

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const noexcept {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  std::vector<std::size_t> degrees() const;
  std::size_t max_degree() const noexcept;
  std::size_t num_isolated() const noexcept;
  bool has_edge(NodeId a, NodeId b) const noexcept;

  /// Re-checks symmetry, ordering, and the absence of loops and duplicates.
  bool check_invariants() const;

  /// Each undirected edge once, as (lo, hi), in ascending order.
  std::vector<Edge> edge_list() const;

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// Dense ids for arbitrary node tokens, assigned in first-seen order.
class NodeIndex {
 public:
  NodeId intern(std::string_view token);
  std::optional<NodeId> find(std::string_view token) const;
  const std::string& token(NodeId id) const { return tokens_[id]; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  /// Identity index ("0", "1", ...) for generated graphs.
  static NodeIndex numbered(std::size_t n);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, NodeId> ids_;
};

struct EdgeListOptions {
  /// Degree above which a bounded-degree warning is emitted.
  std::size_t max_degree_warning = 10000;
};

struct EdgeListData {
  Graph graph;
  NodeIndex index;
  GraphBuildStats stats;
  std::vector<std::string> warnings;
};

/// Parses a whitespace-separated edge list ('#' starts a comment line).
/// Throws ParseError with the 1-based line number on malformed lines, and on
/// input without any edge line.
EdgeListData load_edge_list(std::istream& in, const EdgeListOptions& options = {});
EdgeListData load_edge_list_file(const std::string& path, const EdgeListOptions& options = {});

/// Writes the (token, dense_id) CSV.
void write_id_map_csv(std::ostream& out, const NodeIndex& index);
void write_edge_list(std::ostream& out, const Graph& g, const NodeIndex& index);

/// X' = A X: row i is the sum of the rows of i's neighbors.
Panel neighbor_sum(const Graph& g, const Panel& panel);

/// D^{-1} A X. Rows of isolated nodes are 0.
Panel relational_mean(const Graph& g, const Panel& panel);

inline constexpr std::int32_t kUnreachable = -1;

/// Caller-owned BFS buffers, reusable across focal nodes on the same graph.
/// Only the entries touched by the previous search are reset.
class BfsWorkspace {
 public:
  explicit BfsWorkspace(std::size_t n) : distance_(n, kUnreachable) {}

  std::span<const std::int32_t> distances() const noexcept { return distance_; }
  /// Nodes reached by the last search, in BFS order.
  std::span<const NodeId> reached() const noexcept { return order_; }

 private:
  friend void truncated_bfs(const Graph&, NodeId, std::size_t, BfsWorkspace&);
  std::vector<std::int32_t> distance_;
  std::vector<NodeId> order_;
};

void truncated_bfs(const Graph& g, NodeId focal, std::size_t max_hops, BfsWorkspace& ws);

/// Hop distances from `focal`, kUnreachable beyond `max_hops`.
std::vector<std::int32_t> truncated_bfs(const Graph& g, NodeId focal, std::size_t max_hops);

struct LocalityOptions {
  double cutoff_eps = 1e-8;
  /// gamma > 1 inverts locality; rejected unless set.
  bool allow_gamma_above_one = false;
};

/// w_i = gamma^{d(i, focal)} with 0^0 = 1. Unreachable nodes get 0 when
/// gamma < 1 and 1 when gamma == 1.
struct LocalityWeights {
  NodeId focal = 0;
  double gamma = 0.0;
  double cutoff_eps = 1e-8;
  /// Deepest hop whose weight is kept (>= cutoff_eps).
  std::size_t max_hops = 0;
  std::vector<double> weight;
  /// Nodes with positive weight, ascending.
  std::vector<NodeId> support;
};

LocalityWeights locality_weights(const Graph& g, NodeId focal, double gamma,
                                 const LocalityOptions& options = {});
LocalityWeights locality_weights(const Graph& g, NodeId focal, double gamma,
                                 const LocalityOptions& options, BfsWorkspace& ws);

/// Largest h with gamma^h >= cutoff_eps (for 0 < gamma < 1).
std::size_t locality_hop_limit(double gamma, double cutoff_eps);

}  // namespace rtci
