#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rtci/graph.hpp"
#include "rtci/panel.hpp"
#include "rtci/wls.hpp"

namespace rtci {

/// The model family. Each variant is the same weighted regression with a
/// different node-weight policy:
///   local_*       gamma^{d(i, focal)}
///   individual_*  indicator of the focal node (local with gamma = 0)
///   global_*      every node weighted 1 (local with gamma = 1)
///   neighbors_*   indicator of the focal node's neighbors
/// The *_peer variants add the lagged neighbor mean as a second regressor.
enum class Variant {
  local_individual,
  local_peer,
  individual,
  individual_peer,
  global,
  global_peer,
  neighbors,
  neighbors_peer,
};

inline constexpr Variant kAllVariants[] = {
    Variant::local_individual, Variant::local_peer,  Variant::individual,
    Variant::individual_peer,  Variant::global,      Variant::global_peer,
    Variant::neighbors,        Variant::neighbors_peer,
};

std::string_view to_string(Variant v) noexcept;
/// Throws UsageError on an unknown name.
Variant parse_variant(std::string_view name);

bool is_peer(Variant v) noexcept;
bool is_local(Variant v) noexcept;
bool is_global(Variant v) noexcept;
bool is_individual(Variant v) noexcept;
bool is_neighbors(Variant v) noexcept;

struct ModelSpec {
  Variant variant = Variant::local_individual;
  /// Required by local_*, rejected by every other variant.
  std::optional<double> gamma;
  std::size_t lag = 1;
  /// Required by every variant except global_*.
  std::optional<NodeId> focal;
  bool with_intercept = false;
  bool robust_covariance = false;
  /// neighbors_* pool the focal node's neighbors only unless this is set.
  bool neighbors_include_focal = false;
  bool allow_gamma_above_one = false;
  double cutoff_eps = 1e-8;

  /// Throws UsageError when the variant's required fields are missing or
  /// forbidden ones are present.
  void validate() const;
};

struct NodeWeighting {
  std::vector<double> weight;
  /// Nodes whose weight is at least cutoff_eps, ascending.
  std::vector<NodeId> support;
};

NodeWeighting node_weights(const Graph& g, const ModelSpec& spec);
NodeWeighting node_weights(const Graph& g, const ModelSpec& spec, BfsWorkspace& ws);

FitResult fit(const Graph& g, const Panel& panel, const ModelSpec& spec);
/// Reuses `ws` for the locality BFS (many fits on one graph).
FitResult fit(const Graph& g, const Panel& panel, const ModelSpec& spec, BfsWorkspace& ws);

struct SlidingFit {
  std::size_t t_start = 0;
  FitResult fit;
};

/// One fit per window [t_start, t_start + window_len), t_start = 0, stride, ...
std::vector<SlidingFit> sliding_beta_series(const Graph& g, const Panel& panel,
                                            const ModelSpec& spec, std::size_t window_len,
                                            std::size_t stride);

/// delta[k] = |beta[k+1] - beta[k]| elementwise.
std::vector<Eigen::VectorXd> beta_deltas(std::span<const SlidingFit> series);

/// Interrupted time series around the 0-based column t_int: columns after
/// t_int are treated (c_t = 1). `scope` supplies lag, weighting policy and
/// intercept; peer variants are rejected.
struct ItsSpec {
  ModelSpec scope;
  std::size_t t_int = 0;

  void validate(std::size_t t_max) const;
};

/// Coefficients [beta_I, beta_C, beta_C_prime (, intercept)].
FitResult fit_its(const Graph& g, const Panel& panel, const ItsSpec& spec);

enum class EffectMode {
  /// Roll the fitted model forward from the pre-intervention data twice,
  /// once treated and once with c forced to 0, and sum the difference.
  trajectory,
  /// Sum beta_C * X_{i,t-w} + beta_C' over observed post rows.
  one_step,
};

struct ItsEffect {
  std::vector<NodeId> nodes;
  std::vector<double> per_node;
  /// Mean over nodes.
  double aggregate = 0.0;
};

/// Cumulative effect over columns (t_int, t_int + horizon].
ItsEffect its_effect(const FitResult& fit, const Panel& panel, const ItsSpec& spec,
                     std::size_t horizon, std::span<const NodeId> nodes,
                     EffectMode mode = EffectMode::trajectory);

}  // namespace rtci
