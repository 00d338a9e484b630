#include "rtci/panel.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "rtci/csv.hpp"
#include "rtci/error.hpp"

namespace rtci {

namespace {

struct RawRow {
  std::string token;
  std::vector<double> values;
};

std::vector<RawRow> read_panel_rows(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = csv::split_line(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "node") {
        throw ParseError("panel header must be 'node,v1,...,vT'");
      }
      width = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() - 1 != width) {
      throw ParseError("panel line " + std::to_string(line_no) + ": node '" + fields[0] +
                       "' has " + std::to_string(fields.size() - 1) + " values, expected " +
                       std::to_string(width) + " (ragged row)");
    }
    RawRow row{fields[0], {}};
    row.values.reserve(width);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      row.values.push_back(csv::parse_double(
          fields[k], "panel line " + std::to_string(line_no) + " (node '" + fields[0] + "')"));
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("panel file is empty");
  return rows;
}

}  // namespace

Panel load_panel_csv(std::istream& in, const NodeIndex& index) {
  auto rows = read_panel_rows(in);
  const std::size_t width = rows.empty() ? 0 : rows.front().values.size();
  Panel panel(index.size(), width);
  std::vector<char> seen(index.size(), 0);
  std::vector<std::string> unknown;
  for (const auto& row : rows) {
    auto id = index.find(row.token);
    if (!id) {
      unknown.push_back(row.token);
      continue;
    }
    if (seen[*id]) throw ParseError("panel lists node '" + row.token + "' twice");
    seen[*id] = 1;
    std::copy(row.values.begin(), row.values.end(), panel.row(*id).begin());
  }
  if (!unknown.empty()) {
    std::string msg = "panel rows for unknown nodes:";
    for (const auto& t : unknown) msg += " " + t;
    throw ParseError(msg);
  }
  std::string missing;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) missing += " " + index.token(static_cast<NodeId>(i));
  }
  if (!missing.empty()) throw ParseError("panel is missing nodes:" + missing);
  return panel;
}

Panel load_panel_csv_file(const std::string& path, const NodeIndex& index) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open panel '" + path + "'");
  return load_panel_csv(in, index);
}

PanelData load_panel_csv(std::istream& in) {
  auto rows = read_panel_rows(in);
  PanelData data;
  const std::size_t width = rows.empty() ? 0 : rows.front().values.size();
  std::vector<double> values;
  values.reserve(rows.size() * width);
  for (const auto& row : rows) {
    if (data.index.find(row.token)) throw ParseError("panel lists node '" + row.token + "' twice");
    data.index.intern(row.token);
    values.insert(values.end(), row.values.begin(), row.values.end());
  }
  data.panel = Panel(rows.size(), width, std::move(values));
  return data;
}

PanelData load_panel_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open panel '" + path + "'");
  return load_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const Panel& panel, const NodeIndex& index) {
  out << "node";
  for (std::size_t t = 0; t < panel.num_steps(); ++t) out << ",v" << (t + 1);
  out << '\n';
  for (std::size_t i = 0; i < panel.num_nodes(); ++i) {
    out << csv::quote(index.token(static_cast<NodeId>(i)));
    for (double v : panel.row(i)) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

namespace {

void check_lag(std::size_t lag, std::size_t steps) {
  if (lag < 1) throw UsageError("lag must be >= 1");
  if (lag >= steps) {
    throw DimensionError("lag " + std::to_string(lag) + " leaves no rows in a series of " +
                         std::to_string(steps) + " steps");
  }
}

// Same summation order and scaling as relational_mean, so values agree bitwise.
void peer_mean_row(const Graph& g, const Panel& panel, NodeId i, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (NodeId j : g.neighbors(i)) {
    auto src = panel.row(j);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += src[t];
  }
  const double inv = 1.0 / static_cast<double>(g.degree(i));
  for (double& v : out) v *= inv;
}

}  // namespace

LaggedDesign build_design(const Graph& g, const Panel& panel, const DesignOptions& options) {
  std::vector<NodeId> all(panel.num_nodes());
  std::iota(all.begin(), all.end(), NodeId{0});
  return build_design(g, panel, options, all);
}

LaggedDesign build_design(const Graph& g, const Panel& panel, const DesignOptions& options,
                          std::span<const NodeId> nodes) {
  if (panel.num_nodes() != g.num_nodes()) {
    throw DimensionError("panel has " + std::to_string(panel.num_nodes()) +
                         " rows but graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  const std::size_t steps = panel.num_steps();
  check_lag(options.lag, steps);
  const std::size_t w = options.lag;

  LaggedDesign d;
  d.options = options;
  d.terms.push_back("beta_I");
  if (options.with_peer) d.terms.push_back("beta_P");
  if (options.with_intercept) d.terms.push_back("intercept");
  d.num_regressors = d.terms.size();

  const std::size_t per_node = steps - w;
  d.node.reserve(nodes.size() * per_node);
  d.time.reserve(nodes.size() * per_node);
  d.y.reserve(nodes.size() * per_node);
  d.z.reserve(nodes.size() * per_node * d.num_regressors);

  std::vector<double> peer(options.with_peer ? steps : 0);
  for (NodeId i : nodes) {
    if (i >= g.num_nodes()) throw DimensionError("design node id out of range");
    if (options.with_peer) {
      if (g.degree(i) == 0) continue;
      peer_mean_row(g, panel, i, peer);
    }
    auto x = panel.row(i);
    for (std::size_t t = w; t < steps; ++t) {
      d.node.push_back(i);
      d.time.push_back(static_cast<std::uint32_t>(t));
      d.y.push_back(x[t]);
      d.z.push_back(x[t - w]);
      if (options.with_peer) d.z.push_back(peer[t - w]);
      if (options.with_intercept) d.z.push_back(1.0);
    }
  }
  return d;
}

LaggedDesign build_its_design(const Panel& panel, std::size_t lag, std::size_t t_int,
                              bool with_intercept, std::span<const NodeId> nodes) {
  const std::size_t steps = panel.num_steps();
  check_lag(lag, steps);
  if (t_int < lag || t_int + 1 >= steps) {
    throw DimensionError("intervention index " + std::to_string(t_int) +
                         " must satisfy lag <= t_int < t_max - 1");
  }
  LaggedDesign d;
  d.options = {lag, false, with_intercept};
  d.terms = {"beta_I", "beta_C", "beta_C_prime"};
  if (with_intercept) d.terms.push_back("intercept");
  d.num_regressors = d.terms.size();
  for (NodeId i : nodes) {
    if (i >= panel.num_nodes()) throw DimensionError("design node id out of range");
    auto x = panel.row(i);
    for (std::size_t t = lag; t < steps; ++t) {
      const double c = t > t_int ? 1.0 : 0.0;
      d.node.push_back(i);
      d.time.push_back(static_cast<std::uint32_t>(t));
      d.y.push_back(x[t]);
      d.z.push_back(x[t - lag]);
      d.z.push_back(c * x[t - lag]);
      d.z.push_back(c);
      if (with_intercept) d.z.push_back(1.0);
    }
  }
  return d;
}

std::vector<double> minmax_scale(std::span<const double> series) {
  if (series.empty()) throw UsageError("cannot scale an empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(series.size(), 0.0);
  if (range == 0.0) return out;
  for (std::size_t k = 0; k < series.size(); ++k) out[k] = (series[k] - min) / range;
  return out;
}

Panel minmax_scale_rows(const Panel& panel) {
  Panel out(panel.num_nodes(), panel.num_steps());
  for (std::size_t i = 0; i < panel.num_nodes(); ++i) {
    auto scaled = minmax_scale(panel.row(i));
    std::copy(scaled.begin(), scaled.end(), out.row(i).begin());
  }
  return out;
}

std::vector<double> difference_rank(const Panel& panel, std::optional<TimeWindow> window) {
  TimeWindow w = window.value_or(TimeWindow{0, panel.num_steps()});
  if (w.begin >= w.end) throw UsageError("difference-rank window is empty");
  if (w.end > panel.num_steps()) {
    throw DimensionError("difference-rank window ends at " + std::to_string(w.end) +
                         " beyond " + std::to_string(panel.num_steps()) + " steps");
  }
  std::vector<double> out(panel.num_nodes());
  for (std::size_t i = 0; i < panel.num_nodes(); ++i) {
    auto r = panel.row(i).subspan(w.begin, w.end - w.begin);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    out[i] = *hi - *lo;
  }
  return out;
}

std::vector<NodeId> top_k_by_rank(std::span<const double> values, std::size_t k) {
  if (k < 1 || k > values.size()) {
    throw UsageError("top-k must be in [1, " + std::to_string(values.size()) + "]");
  }
  std::vector<NodeId> ids(values.size());
  std::iota(ids.begin(), ids.end(), NodeId{0});
  auto before = [&](NodeId a, NodeId b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), before);
  ids.resize(k);
  return ids;
}

void write_rank_csv(std::ostream& out, std::span<const double> values,
                    std::span<const NodeId> order, const NodeIndex& index) {
  out << "node,difference_rank\n";
  for (NodeId id : order) {
    out << csv::quote(index.token(id)) << ',' << csv::format_double(values[id]) << '\n';
  }
}

}  // namespace rtci
