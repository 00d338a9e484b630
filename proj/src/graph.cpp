#include "rtci/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rtci/error.hpp"

namespace rtci {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, GraphBuildStats* stats) {
  GraphBuildStats local;
  std::vector<std::uint64_t> counts(n + 1, 0);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw DimensionError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                           ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (a == b) {
      ++local.self_loops_dropped;
      continue;
    }
    ++counts[a + 1];
    ++counts[b + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  std::vector<NodeId> adjacency(counts[n]);
  std::vector<std::uint64_t> cursor(counts.begin(), counts.end() - 1);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    adjacency[cursor[a]++] = b;
    adjacency[cursor[b]++] = a;
  }

  // Sort and dedupe each list in place, then compact.
  Graph g;
  g.offsets_.assign(n + 1, 0);
  std::uint64_t write = 0;
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto first = adjacency.begin() + static_cast<std::ptrdiff_t>(counts[i]);
    auto last = adjacency.begin() + static_cast<std::ptrdiff_t>(counts[i + 1]);
    std::sort(first, last);
    auto unique_end = std::unique(first, last);
    removed += static_cast<std::size_t>(last - unique_end);
    for (auto it = first; it != unique_end; ++it) adjacency[write++] = *it;
    g.offsets_[i + 1] = write;
  }
  adjacency.resize(write);
  adjacency.shrink_to_fit();
  g.adjacency_ = std::move(adjacency);
  // Each repeated undirected edge was removed from both endpoint lists.
  local.duplicates_collapsed = removed / 2;
  if (stats) *stats = local;
  return g;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = degree(static_cast<NodeId>(i));
  return out;
}

std::size_t Graph::max_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 0; i < num_nodes(); ++i) best = std::max(best, degree(static_cast<NodeId>(i)));
  return best;
}

std::size_t Graph::num_isolated() const noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < num_nodes(); ++i) count += degree(static_cast<NodeId>(i)) == 0;
  return count;
}

bool Graph::has_edge(NodeId a, NodeId b) const noexcept {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

bool Graph::check_invariants() const {
  const std::size_t n = num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n || nb[k] == i) return false;
      if (k > 0 && nb[k - 1] >= nb[k]) return false;
      if (!has_edge(nb[k], static_cast<NodeId>(i))) return false;
    }
  }
  return true;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    for (NodeId j : neighbors(static_cast<NodeId>(i))) {
      if (i < j) out.emplace_back(static_cast<NodeId>(i), j);
    }
  }
  return out;
}

NodeId NodeIndex::intern(std::string_view token) {
  std::string key(token);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<NodeId>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<NodeId> NodeIndex::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NodeIndex NodeIndex::numbered(std::size_t n) {
  NodeIndex index;
  for (std::size_t i = 0; i < n; ++i) index.intern(std::to_string(i));
  return index;
}

EdgeListData load_edge_list(std::istream& in, const EdgeListOptions& options) {
  EdgeListData data;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    fields >> a >> b;
    if (b.empty() || (fields >> extra)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected exactly 2 node tokens");
    }
    const NodeId ia = data.index.intern(a);
    const NodeId ib = data.index.intern(b);
    edges.emplace_back(ia, ib);
  }
  if (edges.empty()) throw ParseError("edge list is empty");

  data.graph = Graph::from_edges(data.index.size(), edges, &data.stats);
  if (data.stats.self_loops_dropped > 0) {
    data.warnings.push_back("dropped " + std::to_string(data.stats.self_loops_dropped) +
                            " self-loop line(s)");
  }
  const std::size_t max_deg = data.graph.max_degree();
  if (max_deg > options.max_degree_warning) {
    data.warnings.push_back("max degree " + std::to_string(max_deg) + " exceeds " +
                            std::to_string(options.max_degree_warning) +
                            "; bounded-degree assumption may not hold");
  }
  return data;
}

EdgeListData load_edge_list_file(const std::string& path, const EdgeListOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  return load_edge_list(in, options);
}

void write_id_map_csv(std::ostream& out, const NodeIndex& index) {
  out << "token,dense_id\n";
  for (std::size_t i = 0; i < index.size(); ++i) out << index.tokens()[i] << ',' << i << '\n';
}

void write_edge_list(std::ostream& out, const Graph& g, const NodeIndex& index) {
  for (const auto& [a, b] : g.edge_list()) out << index.token(a) << ' ' << index.token(b) << '\n';
}

namespace {

void require_rows(const Graph& g, const Panel& panel) {
  if (panel.num_nodes() != g.num_nodes()) {
    throw DimensionError("panel has " + std::to_string(panel.num_nodes()) +
                         " rows but graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
}

}  // namespace

Panel neighbor_sum(const Graph& g, const Panel& panel) {
  require_rows(g, panel);
  Panel out(panel.num_nodes(), panel.num_steps());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    auto dst = out.row(i);
    for (NodeId j : g.neighbors(static_cast<NodeId>(i))) {
      auto src = panel.row(j);
      for (std::size_t t = 0; t < dst.size(); ++t) dst[t] += src[t];
    }
  }
  return out;
}

Panel relational_mean(const Graph& g, const Panel& panel) {
  Panel out = neighbor_sum(g, panel);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const std::size_t deg = g.degree(static_cast<NodeId>(i));
    if (deg == 0) continue;
    const double inv = 1.0 / static_cast<double>(deg);
    for (double& v : out.row(i)) v *= inv;
  }
  return out;
}

void truncated_bfs(const Graph& g, NodeId focal, std::size_t max_hops, BfsWorkspace& ws) {
  if (focal >= g.num_nodes()) {
    throw DimensionError("focal node " + std::to_string(focal) + " outside [0, " +
                         std::to_string(g.num_nodes()) + ")");
  }
  if (ws.distance_.size() != g.num_nodes()) {
    throw DimensionError("BFS workspace sized for a different graph");
  }
  for (NodeId v : ws.order_) ws.distance_[v] = kUnreachable;
  ws.order_.clear();

  ws.distance_[focal] = 0;
  ws.order_.push_back(focal);
  // order_ doubles as the FIFO queue.
  for (std::size_t head = 0; head < ws.order_.size(); ++head) {
    const NodeId u = ws.order_[head];
    const std::int32_t du = ws.distance_[u];
    if (static_cast<std::size_t>(du) >= max_hops) break;
    for (NodeId v : g.neighbors(u)) {
      if (ws.distance_[v] == kUnreachable) {
        ws.distance_[v] = du + 1;
        ws.order_.push_back(v);
      }
    }
  }
}

std::vector<std::int32_t> truncated_bfs(const Graph& g, NodeId focal, std::size_t max_hops) {
  BfsWorkspace ws(g.num_nodes());
  truncated_bfs(g, focal, max_hops, ws);
  auto d = ws.distances();
  return {d.begin(), d.end()};
}

std::size_t locality_hop_limit(double gamma, double cutoff_eps) {
  std::size_t hops = 0;
  double w = 1.0;
  while (w * gamma >= cutoff_eps) {
    w *= gamma;
    ++hops;
  }
  return hops;
}

LocalityWeights locality_weights(const Graph& g, NodeId focal, double gamma,
                                 const LocalityOptions& options) {
  BfsWorkspace ws(g.num_nodes());
  return locality_weights(g, focal, gamma, options, ws);
}

LocalityWeights locality_weights(const Graph& g, NodeId focal, double gamma,
                                 const LocalityOptions& options, BfsWorkspace& ws) {
  const std::size_t n = g.num_nodes();
  if (focal >= n) {
    throw DimensionError("focal node " + std::to_string(focal) + " outside [0, " +
                         std::to_string(n) + ")");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw UsageError("gamma must be a finite value >= 0");
  }
  if (gamma > 1.0 && !options.allow_gamma_above_one) {
    throw UsageError("gamma > 1 inverts locality and requires an explicit opt-in");
  }
  if (!(options.cutoff_eps > 0.0)) throw UsageError("cutoff_eps must be > 0");

  LocalityWeights lw;
  lw.focal = focal;
  lw.gamma = gamma;
  lw.cutoff_eps = options.cutoff_eps;
  lw.weight.assign(n, 0.0);

  if (gamma == 1.0) {
    lw.max_hops = n;
    std::fill(lw.weight.begin(), lw.weight.end(), 1.0);
    lw.support.resize(n);
    std::iota(lw.support.begin(), lw.support.end(), NodeId{0});
    return lw;
  }
  if (gamma == 0.0 || gamma < options.cutoff_eps) {
    lw.max_hops = 0;
    lw.weight[focal] = 1.0;
    lw.support = {focal};
    return lw;
  }

  lw.max_hops = gamma < 1.0 ? locality_hop_limit(gamma, options.cutoff_eps) : n;
  truncated_bfs(g, focal, lw.max_hops, ws);
  auto dist = ws.distances();
  for (NodeId v : ws.reached()) lw.weight[v] = std::pow(gamma, dist[v]);
  lw.support.assign(ws.reached().begin(), ws.reached().end());
  std::sort(lw.support.begin(), lw.support.end());
  return lw;
}

}  // namespace rtci
