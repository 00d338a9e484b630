#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rtci/estimators.hpp"
#include "rtci/graph.hpp"
#include "rtci/rng.hpp"

namespace rtci {

/// G(n, p): every unordered pair is an edge independently with probability p.
Graph gen_erdos_renyi(std::size_t n, double p, Rng& rng);

/// Ring lattice joining each node to k_each_side neighbors per side, then
/// each lattice edge has one endpoint redrawn with probability p_rewire.
/// Always n * k_each_side edges.
Graph gen_watts_strogatz(std::size_t n, std::size_t k_each_side, double p_rewire, Rng& rng);

/// Seed clique of m_per_node + 1 nodes; every later node attaches to
/// m_per_node distinct existing nodes with probability proportional to
/// degree^power.
Graph gen_barabasi_albert(std::size_t n, double power, std::size_t m_per_node, Rng& rng);

/// Covariance for node coefficients: S = sym((D^{-1}A)^2), shifted by
/// (delta - lambda_min) I when lambda_min < delta. Throws on isolated nodes.
Eigen::MatrixXd beta_covariance(const Graph& g, double delta = 1e-6);

/// One MVN(mean, scale^2 * Sigma) draw, Sigma from beta_covariance.
std::vector<double> draw_node_betas(const Graph& g, Rng& rng, double mean = 1.0,
                                    double scale = 1.0);

enum class Scenario { individual, peer };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct NodeCoefficients {
  std::vector<double> beta_i;
  /// Empty for the individual scenario.
  std::vector<double> beta_p;
};

/// AR(1) panel: x_{t} = beta_I x_{t-1} (+ beta_P D^{-1}A x_{t-1}) + eps,
/// eps ~ N(0, noise_sd^2). The first column is N(0, noise_sd^2) unless
/// `initial` is given.
Panel simulate_panel(const Graph& g, const NodeCoefficients& coefs, std::size_t t_max,
                     double noise_sd, Rng& rng,
                     std::optional<std::span<const double>> initial = std::nullopt);

struct ErdosRenyi {
  double p = 0.2;
};
struct WattsStrogatz {
  std::size_t k_each_side = 5;
  double p_rewire = 0.2;
};
struct BarabasiAlbert {
  double power = 1.0;
  std::size_t m_per_node = 2;
};
using GraphModel = std::variant<ErdosRenyi, WattsStrogatz, BarabasiAlbert>;

std::string graph_model_name(const GraphModel& model);
std::string graph_model_params(const GraphModel& model);

Graph generate_graph(const GraphModel& model, std::size_t n, Rng& rng);

struct SynthConfig {
  GraphModel graph_model = ErdosRenyi{};
  std::size_t n = 100;
  Scenario scenario = Scenario::individual;
  double true_beta_mean = 1.0;
  /// Replaces the beta_P draw with a constant.
  std::optional<double> peer_beta_constant;
  /// Multiplies the MVN deviation from the mean.
  double beta_scale = 1.0;
  /// Clamps drawn coefficients into [-clip, clip].
  std::optional<double> stationary_clip;
  double noise_sd = 1.0;
  /// Standard deviation of the first column; noise_sd when unset.
  std::optional<double> initial_sd;
  std::uint64_t seed = 0;
  /// Reuse one graph for all trials instead of regenerating per trial.
  bool fixed_graph = false;
  std::size_t max_graph_attempts = 100;

  void validate() const;
};

/// A graph with no isolated node, regenerating up to max_graph_attempts.
Graph generate_connected_support_graph(const SynthConfig& config, Rng& rng);

NodeCoefficients draw_coefficients(const Graph& g, const SynthConfig& config, Rng& rng);

/// simulate_panel with the config's noise, and a first column drawn with
/// initial_sd when set.
Panel simulate_panel(const Graph& g, const NodeCoefficients& coefs, std::size_t t_max,
                     const SynthConfig& config, Rng& rng);

struct EstimatorSpec {
  std::string label;
  ModelSpec spec;
};

/// Label like "local_individual[gamma=0.05]".
EstimatorSpec make_estimator(Variant v, std::optional<double> gamma = std::nullopt);

struct TrialCell {
  std::size_t t_max = 0;
  std::string estimator;
  double mse = 0.0;
  double mc_stderr = 0.0;
  double rmse = 0.0;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
};

struct TrialReport {
  SynthConfig config;
  std::size_t trials = 0;
  std::vector<TrialCell> cells;

  /// Throws UsageError when absent.
  const TrialCell& at(std::size_t t_max, std::string_view estimator) const;
};

struct TrialOptions {
  std::size_t trials = 100;
  std::vector<std::size_t> t_grid = {10, 30, 50, 100, 200};
  /// 0 = hardware concurrency.
  std::size_t threads = 1;
};

/// Monte Carlo MSE of each estimator's coefficients against the focal node's
/// true coefficients. Each trial draws a fresh graph (unless fixed_graph),
/// coefficients, panel of max(t_grid) steps and a uniform focal node, and
/// fits every estimator on each prefix length in t_grid. Trial i uses the
/// sub-seed derive_seed(seed, i), so results do not depend on threading.
TrialReport run_trials(const SynthConfig& config, std::span<const EstimatorSpec> estimators,
                       const TrialOptions& options);

void write_trial_report_csv(std::ostream& out, const TrialReport& report);

}  // namespace rtci
