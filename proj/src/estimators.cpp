#include "rtci/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rtci/error.hpp"

namespace rtci {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::local_individual: return "local_individual";
    case Variant::local_peer: return "local_peer";
    case Variant::individual: return "individual";
    case Variant::individual_peer: return "individual_peer";
    case Variant::global: return "global";
    case Variant::global_peer: return "global_peer";
    case Variant::neighbors: return "neighbors";
    case Variant::neighbors_peer: return "neighbors_peer";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  throw UsageError("unknown variant '" + std::string(name) + "'");
}

bool is_peer(Variant v) noexcept {
  return v == Variant::local_peer || v == Variant::individual_peer ||
         v == Variant::global_peer || v == Variant::neighbors_peer;
}
bool is_local(Variant v) noexcept {
  return v == Variant::local_individual || v == Variant::local_peer;
}
bool is_global(Variant v) noexcept { return v == Variant::global || v == Variant::global_peer; }
bool is_individual(Variant v) noexcept {
  return v == Variant::individual || v == Variant::individual_peer;
}
bool is_neighbors(Variant v) noexcept {
  return v == Variant::neighbors || v == Variant::neighbors_peer;
}

void ModelSpec::validate() const {
  const std::string name(to_string(variant));
  if (lag < 1) throw UsageError("lag must be >= 1");
  if (is_local(variant)) {
    if (!gamma) throw UsageError(name + " requires gamma");
    if (!std::isfinite(*gamma) || *gamma < 0.0) throw UsageError("gamma must be >= 0");
    if (*gamma > 1.0 && !allow_gamma_above_one) {
      throw UsageError("gamma > 1 inverts locality and requires an explicit opt-in");
    }
  } else if (gamma) {
    throw UsageError(name + " does not take gamma");
  }
  if (!is_global(variant) && !focal) throw UsageError(name + " requires a focal node");
  if (!(cutoff_eps > 0.0)) throw UsageError("cutoff_eps must be > 0");
}

NodeWeighting node_weights(const Graph& g, const ModelSpec& spec) {
  BfsWorkspace ws(g.num_nodes());
  return node_weights(g, spec, ws);
}

NodeWeighting node_weights(const Graph& g, const ModelSpec& spec, BfsWorkspace& ws) {
  spec.validate();
  const std::size_t n = g.num_nodes();
  if (spec.focal && *spec.focal >= n) {
    throw DimensionError("focal node " + std::to_string(*spec.focal) + " outside [0, " +
                         std::to_string(n) + ")");
  }
  NodeWeighting out;
  if (is_local(spec.variant)) {
    LocalityOptions opts{spec.cutoff_eps, spec.allow_gamma_above_one};
    auto lw = locality_weights(g, *spec.focal, *spec.gamma, opts, ws);
    out.weight = std::move(lw.weight);
    for (NodeId v : lw.support) {
      if (out.weight[v] >= spec.cutoff_eps) out.support.push_back(v);
    }
    return out;
  }
  out.weight.assign(n, 0.0);
  if (is_global(spec.variant)) {
    std::fill(out.weight.begin(), out.weight.end(), 1.0);
    out.support.resize(n);
    std::iota(out.support.begin(), out.support.end(), NodeId{0});
  } else if (is_individual(spec.variant)) {
    out.weight[*spec.focal] = 1.0;
    out.support = {*spec.focal};
  } else {
    auto nb = g.neighbors(*spec.focal);
    out.support.assign(nb.begin(), nb.end());
    if (spec.neighbors_include_focal) {
      out.support.insert(std::lower_bound(out.support.begin(), out.support.end(), *spec.focal),
                         *spec.focal);
    }
    for (NodeId v : out.support) out.weight[v] = 1.0;
  }
  return out;
}

FitResult fit(const Graph& g, const Panel& panel, const ModelSpec& spec) {
  BfsWorkspace ws(g.num_nodes());
  return fit(g, panel, spec, ws);
}

FitResult fit(const Graph& g, const Panel& panel, const ModelSpec& spec, BfsWorkspace& ws) {
  if (panel.num_nodes() != g.num_nodes()) {
    throw DimensionError("panel has " + std::to_string(panel.num_nodes()) +
                         " rows but graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  const NodeWeighting weights = node_weights(g, spec, ws);
  if (is_neighbors(spec.variant) && weights.support.empty()) {
    throw UnderdeterminedError("focal node has no neighbors to pool");
  }
  const DesignOptions design_opts{spec.lag, is_peer(spec.variant), spec.with_intercept};
  const LaggedDesign design = build_design(g, panel, design_opts, weights.support);
  const WlsOptions wls_opts{spec.cutoff_eps, spec.robust_covariance};
  return fit_wls(design, weights.weight, wls_opts);
}

std::vector<SlidingFit> sliding_beta_series(const Graph& g, const Panel& panel,
                                            const ModelSpec& spec, std::size_t window_len,
                                            std::size_t stride) {
  if (stride < 1) throw UsageError("stride must be >= 1");
  if (window_len < spec.lag + 1) {
    throw UsageError("window of " + std::to_string(window_len) +
                     " steps cannot form a design row at lag " + std::to_string(spec.lag));
  }
  if (window_len > panel.num_steps()) {
    throw UsageError("window of " + std::to_string(window_len) + " steps exceeds the panel's " +
                     std::to_string(panel.num_steps()));
  }
  BfsWorkspace ws(g.num_nodes());
  std::vector<SlidingFit> out;
  for (std::size_t start = 0; start + window_len <= panel.num_steps(); start += stride) {
    out.push_back({start, fit(g, panel.columns(start, start + window_len), spec, ws)});
  }
  return out;
}

std::vector<Eigen::VectorXd> beta_deltas(std::span<const SlidingFit> series) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    out.push_back((series[k + 1].fit.beta - series[k].fit.beta).cwiseAbs());
  }
  return out;
}

void ItsSpec::validate(std::size_t t_max) const {
  scope.validate();
  if (is_peer(scope.variant)) {
    throw UsageError("interrupted time series supports the non-peer variants only");
  }
  // Pre rows are t in [lag, t_int], post rows t in (t_int, t_max).
  if (t_int < scope.lag + 1 || t_int + 3 > t_max) {
    throw UsageError("intervention index " + std::to_string(t_int) + " leaves fewer than 2 pre- or "
                     "post-intervention rows (lag " + std::to_string(scope.lag) + ", t_max " +
                     std::to_string(t_max) + ")");
  }
}

FitResult fit_its(const Graph& g, const Panel& panel, const ItsSpec& spec) {
  if (panel.num_nodes() != g.num_nodes()) {
    throw DimensionError("panel has " + std::to_string(panel.num_nodes()) +
                         " rows but graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  spec.validate(panel.num_steps());
  const NodeWeighting weights = node_weights(g, spec.scope);
  if (weights.support.empty()) throw UnderdeterminedError("no nodes carry weight");
  const LaggedDesign design = build_its_design(panel, spec.scope.lag, spec.t_int,
                                               spec.scope.with_intercept, weights.support);
  const WlsOptions wls_opts{spec.scope.cutoff_eps, spec.scope.robust_covariance};
  return fit_wls(design, weights.weight, wls_opts);
}

ItsEffect its_effect(const FitResult& fit, const Panel& panel, const ItsSpec& spec,
                     std::size_t horizon, std::span<const NodeId> nodes, EffectMode mode) {
  if (fit.terms.size() < 3 || fit.terms[1] != "beta_C" || fit.terms[2] != "beta_C_prime") {
    throw UsageError("its_effect needs a fit produced by fit_its");
  }
  if (horizon < 1 || spec.t_int + horizon >= panel.num_steps()) {
    throw UsageError("horizon " + std::to_string(horizon) + " runs past the last column " +
                     std::to_string(panel.num_steps() - 1));
  }
  const double b_i = fit.beta[0];
  const double b_c = fit.beta[1];
  const double b_cp = fit.beta[2];
  const double icpt = fit.beta.size() > 3 ? fit.beta[3] : 0.0;
  const std::size_t w = spec.scope.lag;
  const std::size_t first = spec.t_int + 1;
  const std::size_t last = spec.t_int + horizon;

  ItsEffect out;
  out.nodes.assign(nodes.begin(), nodes.end());
  std::vector<double> treated, control;
  for (NodeId i : nodes) {
    if (i >= panel.num_nodes()) throw DimensionError("effect node id out of range");
    auto x = panel.row(i);
    double effect = 0.0;
    if (mode == EffectMode::one_step) {
      for (std::size_t t = first; t <= last; ++t) effect += b_c * x[t - w] + b_cp;
    } else {
      treated.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(first));
      control = treated;
      for (std::size_t t = first; t <= last; ++t) {
        treated.push_back((b_i + b_c) * treated[t - w] + b_cp + icpt);
        control.push_back(b_i * control[t - w] + icpt);
        effect += treated[t] - control[t];
      }
    }
    out.per_node.push_back(effect);
  }
  if (!out.per_node.empty()) {
    out.aggregate = std::accumulate(out.per_node.begin(), out.per_node.end(), 0.0) /
                    static_cast<double>(out.per_node.size());
  }
  return out;
}

}  // namespace rtci
