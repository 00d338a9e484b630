#include <algorithm>
#include <cmath>
#include <string>

#include "rtci/error.hpp"
#include "rtci/synth.hpp"

namespace rtci {

Eigen::MatrixXd beta_covariance(const Graph& g, double delta) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (g.num_isolated() > 0) {
    throw UsageError("coefficient covariance needs a graph without isolated nodes");
  }
  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nb = g.neighbors(static_cast<NodeId>(i));
    const double inv = 1.0 / static_cast<double>(nb.size());
    for (NodeId j : nb) transition(i, j) = inv;
  }
  const Eigen::MatrixXd two_step = transition * transition;
  Eigen::MatrixXd sigma = 0.5 * (two_step + two_step.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin < delta) sigma.diagonal().array() += delta - lmin;
  return sigma;
}

namespace {

std::vector<double> draw_mvn(const Eigen::MatrixXd& chol_lower, double mean, double scale,
                             Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = chol_lower.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = normal(rng);
  const Eigen::VectorXd dev = chol_lower.triangularView<Eigen::Lower>() * z;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = mean + scale * dev[k];
  return out;
}

Eigen::MatrixXd cholesky_factor(const Graph& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(beta_covariance(g));
  if (llt.info() != Eigen::Success) throw EstimationError("coefficient covariance is not PD");
  return llt.matrixL();
}

}  // namespace

std::vector<double> draw_node_betas(const Graph& g, Rng& rng, double mean, double scale) {
  return draw_mvn(cholesky_factor(g), mean, scale, rng);
}

std::string_view to_string(Scenario s) noexcept {
  return s == Scenario::individual ? "individual" : "peer";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "individual") return Scenario::individual;
  if (name == "peer") return Scenario::peer;
  throw UsageError("unknown scenario '" + std::string(name) + "'");
}

Panel simulate_panel(const Graph& g, const NodeCoefficients& coefs, std::size_t t_max,
                     double noise_sd, Rng& rng, std::optional<std::span<const double>> initial) {
  const std::size_t n = g.num_nodes();
  if (coefs.beta_i.size() != n || (!coefs.beta_p.empty() && coefs.beta_p.size() != n)) {
    throw DimensionError("one coefficient per node expected");
  }
  if (t_max < 1) throw UsageError("t_max must be >= 1");
  if (!(noise_sd >= 0.0)) throw UsageError("noise_sd must be >= 0");
  const bool peer = !coefs.beta_p.empty();
  std::normal_distribution<double> normal(0.0, 1.0);

  Panel panel(n, t_max);
  if (initial) {
    if (initial->size() != n) throw DimensionError("initial column needs one value per node");
    for (std::size_t i = 0; i < n; ++i) panel(i, 0) = (*initial)[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) panel(i, 0) = noise_sd * normal(rng);
  }
  std::vector<double> prev(n), peer_mean(n);
  for (std::size_t t = 1; t < t_max; ++t) {
    for (std::size_t i = 0; i < n; ++i) prev[i] = panel(i, t - 1);
    if (peer) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto nb = g.neighbors(static_cast<NodeId>(i));
        double s = 0.0;
        for (NodeId j : nb) s += prev[j];
        peer_mean[i] = nb.empty() ? 0.0 : s * (1.0 / static_cast<double>(nb.size()));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = coefs.beta_i[i] * prev[i];
      if (peer) v += coefs.beta_p[i] * peer_mean[i];
      panel(i, t) = v + noise_sd * normal(rng);
    }
  }
  return panel;
}

void SynthConfig::validate() const {
  if (n < 3) throw UsageError("synthetic graphs need n >= 3");
  if (!(noise_sd >= 0.0)) throw UsageError("noise_sd must be >= 0");
  if (initial_sd && !(*initial_sd >= 0.0)) throw UsageError("initial_sd must be >= 0");
  if (!(beta_scale >= 0.0)) throw UsageError("beta_scale must be >= 0");
  if (stationary_clip && !(*stationary_clip > 0.0)) throw UsageError("clip must be > 0");
  if (max_graph_attempts < 1) throw UsageError("max_graph_attempts must be >= 1");
  struct Visitor {
    void operator()(const ErdosRenyi& m) const {
      if (!(m.p >= 0.0 && m.p <= 1.0)) throw UsageError("Erdos-Renyi p must be in [0, 1]");
    }
    void operator()(const WattsStrogatz& m) const {
      if (!(m.p_rewire >= 0.0 && m.p_rewire <= 1.0)) {
        throw UsageError("rewiring probability must be in [0, 1]");
      }
      if (m.k_each_side < 1) throw UsageError("k_each_side must be >= 1");
    }
    void operator()(const BarabasiAlbert& m) const {
      if (m.m_per_node < 1) throw UsageError("m_per_node must be >= 1");
      if (!(m.power > 0.0)) throw UsageError("power must be > 0");
    }
  };
  std::visit(Visitor{}, graph_model);
}

Graph generate_connected_support_graph(const SynthConfig& config, Rng& rng) {
  for (std::size_t attempt = 0; attempt < config.max_graph_attempts; ++attempt) {
    Graph g = generate_graph(config.graph_model, config.n, rng);
    if (g.num_isolated() == 0) return g;
  }
  throw EstimationError("no graph without isolated nodes after " +
                        std::to_string(config.max_graph_attempts) + " attempts");
}

NodeCoefficients draw_coefficients(const Graph& g, const SynthConfig& config, Rng& rng) {
  const Eigen::MatrixXd chol = cholesky_factor(g);
  NodeCoefficients coefs;
  coefs.beta_i = draw_mvn(chol, config.true_beta_mean, config.beta_scale, rng);
  if (config.scenario == Scenario::peer) {
    if (config.peer_beta_constant) {
      coefs.beta_p.assign(g.num_nodes(), *config.peer_beta_constant);
    } else {
      coefs.beta_p = draw_mvn(chol, config.true_beta_mean, config.beta_scale, rng);
    }
  }
  if (config.stationary_clip) {
    const double c = *config.stationary_clip;
    for (double& b : coefs.beta_i) b = std::clamp(b, -c, c);
    for (double& b : coefs.beta_p) b = std::clamp(b, -c, c);
  }
  return coefs;
}

Panel simulate_panel(const Graph& g, const NodeCoefficients& coefs, std::size_t t_max,
                     const SynthConfig& config, Rng& rng) {
  if (!config.initial_sd) return simulate_panel(g, coefs, t_max, config.noise_sd, rng);
  std::normal_distribution<double> n01;
  std::vector<double> initial(g.num_nodes());
  for (double& v : initial) v = *config.initial_sd * n01(rng);
  return simulate_panel(g, coefs, t_max, config.noise_sd, rng, std::span<const double>(initial));
}

}  // namespace rtci
