#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtci/graph.hpp"
#include "rtci/types.hpp"

namespace rtci {

/// Loads "node,v1,...,vT" CSV rows into a panel ordered by the ids of
/// `index`. Every token must be known and every indexed node present.
Panel load_panel_csv(std::istream& in, const NodeIndex& index);
Panel load_panel_csv_file(const std::string& path, const NodeIndex& index);

struct PanelData {
  Panel panel;
  NodeIndex index;
};

/// Same format, ids assigned from row order (for commands without a graph).
PanelData load_panel_csv(std::istream& in);
PanelData load_panel_csv_file(const std::string& path);

void write_panel_csv(std::ostream& out, const Panel& panel, const NodeIndex& index);

struct DesignOptions {
  std::size_t lag = 1;
  bool with_peer = false;
  bool with_intercept = false;
};

/// Stacked regression rows for lagged node models. Rows are node-major, then
/// by time. Regressors per row: [X_{i,t-w}], then the peer mean
/// [D^{-1}AX]_{i,t-w} when requested, then a trailing 1 for the intercept.
struct LaggedDesign {
  DesignOptions options;
  std::size_t num_regressors = 0;
  std::vector<std::string> terms;
  std::vector<NodeId> node;
  /// 0-based column of the response.
  std::vector<std::uint32_t> time;
  /// Row-major, rows() x num_regressors.
  std::vector<double> z;
  std::vector<double> y;

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> regressors(std::size_t r) const noexcept {
    return {z.data() + r * num_regressors, num_regressors};
  }
};

/// All nodes (peer designs skip isolated nodes).
LaggedDesign build_design(const Graph& g, const Panel& panel, const DesignOptions& options);

/// Only the listed nodes, in the given order.
LaggedDesign build_design(const Graph& g, const Panel& panel, const DesignOptions& options,
                          std::span<const NodeId> nodes);

/// Interrupted time series rows: [X_{i,t-w}, c_t X_{i,t-w}, c_t (, 1)] with
/// c_t = 1 iff t > t_int (0-based column indices).
LaggedDesign build_its_design(const Panel& panel, std::size_t lag, std::size_t t_int,
                              bool with_intercept, std::span<const NodeId> nodes);

/// (x - min) / (max - min); a constant series maps to zeros.
std::vector<double> minmax_scale(std::span<const double> series);

/// Applies minmax_scale to every row.
Panel minmax_scale_rows(const Panel& panel);

/// Half-open column range [begin, end).
struct TimeWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// max - min of each row over the window (whole row when absent).
std::vector<double> difference_rank(const Panel& panel,
                                    std::optional<TimeWindow> window = std::nullopt);

/// Top-k node ids by descending value; ties go to the smaller id.
std::vector<NodeId> top_k_by_rank(std::span<const double> values, std::size_t k);

/// (node_token, rank_value) rows for the given ordering.
void write_rank_csv(std::ostream& out, std::span<const double> values,
                    std::span<const NodeId> order, const NodeIndex& index);

}  // namespace rtci
