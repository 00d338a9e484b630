#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "rtci/csv.hpp"
#include "rtci/error.hpp"
#include "rtci/synth.hpp"

namespace rtci {

EstimatorSpec make_estimator(Variant v, std::optional<double> gamma) {
  EstimatorSpec e;
  e.spec.variant = v;
  e.spec.gamma = gamma;
  e.label = std::string(to_string(v));
  if (gamma) e.label += "[gamma=" + csv::format_double(*gamma) + "]";
  return e;
}

const TrialCell& TrialReport::at(std::size_t t_max, std::string_view estimator) const {
  for (const auto& c : cells) {
    if (c.t_max == t_max && c.estimator == estimator) return c;
  }
  throw UsageError("no trial cell for t_max " + std::to_string(t_max) + ", estimator '" +
                   std::string(estimator) + "'");
}

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double squared_error(const FitResult& fit, const ModelSpec& spec, const NodeCoefficients& truth,
                     NodeId focal) {
  const double d_i = fit.beta[0] - truth.beta_i[focal];
  double se = d_i * d_i;
  if (is_peer(spec.variant)) {
    const double true_p = truth.beta_p.empty() ? 0.0 : truth.beta_p[focal];
    const double d_p = fit.beta[1] - true_p;
    se += d_p * d_p;
  }
  return se;
}

}  // namespace

TrialReport run_trials(const SynthConfig& config, std::span<const EstimatorSpec> estimators,
                       const TrialOptions& options) {
  config.validate();
  if (options.trials < 1) throw UsageError("trials must be >= 1");
  if (options.t_grid.empty()) throw UsageError("t_max grid is empty");
  if (estimators.empty()) throw UsageError("no estimators to evaluate");
  for (std::size_t t : options.t_grid) {
    if (t < 2) throw UsageError("every t_max must be >= 2");
  }
  const std::size_t t_longest = *std::max_element(options.t_grid.begin(), options.t_grid.end());
  const std::size_t n_grid = options.t_grid.size();
  const std::size_t n_est = estimators.size();

  std::optional<Graph> shared_graph;
  if (config.fixed_graph) {
    Rng rng(derive_seed(config.seed, UINT64_MAX));
    shared_graph = generate_connected_support_graph(config, rng);
  }

  // errors[trial][grid][estimator]; NaN marks a failed fit.
  std::vector<double> errors(options.trials * n_grid * n_est,
                             std::numeric_limits<double>::quiet_NaN());
  auto run_one = [&](std::size_t trial) {
    Rng rng(derive_seed(config.seed, trial));
    Graph g = shared_graph ? *shared_graph : generate_connected_support_graph(config, rng);
    const NodeCoefficients truth = draw_coefficients(g, config, rng);
    const Panel panel = simulate_panel(g, truth, t_longest, config, rng);
    const auto focal = static_cast<NodeId>(uniform_index(rng, g.num_nodes()));
    BfsWorkspace ws(g.num_nodes());
    for (std::size_t gi = 0; gi < n_grid; ++gi) {
      const std::size_t t = options.t_grid[gi];
      const Panel prefix = t == t_longest ? panel : panel.columns(0, t);
      for (std::size_t e = 0; e < n_est; ++e) {
        ModelSpec spec = estimators[e].spec;
        if (!is_global(spec.variant) || !spec.focal) spec.focal = focal;
        try {
          const FitResult f = fit(g, prefix, spec, ws);
          const double se = squared_error(f, spec, truth, focal);
          if (std::isfinite(se)) errors[(trial * n_grid + gi) * n_est + e] = se;
        } catch (const Error&) {
          // Counted as failed below.
        }
      }
    }
  };

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, options.trials);
  if (threads == 1) {
    for (std::size_t i = 0; i < options.trials; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(threads);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < options.trials; i = next++) run_one(i);
        } catch (...) {
          failures[w] = std::current_exception();
          next = options.trials;
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  TrialReport report;
  report.config = config;
  report.trials = options.trials;
  for (std::size_t gi = 0; gi < n_grid; ++gi) {
    for (std::size_t e = 0; e < n_est; ++e) {
      TrialCell cell;
      cell.t_max = options.t_grid[gi];
      cell.estimator = estimators[e].label;
      CompensatedSum sum;
      for (std::size_t i = 0; i < options.trials; ++i) {
        const double v = errors[(i * n_grid + gi) * n_est + e];
        if (std::isnan(v)) {
          ++cell.trials_failed;
        } else {
          sum.add(v);
          ++cell.trials_ok;
        }
      }
      if (cell.trials_ok > 0) {
        cell.mse = sum.value() / static_cast<double>(cell.trials_ok);
        CompensatedSum sq;
        for (std::size_t i = 0; i < options.trials; ++i) {
          const double v = errors[(i * n_grid + gi) * n_est + e];
          if (!std::isnan(v)) sq.add((v - cell.mse) * (v - cell.mse));
        }
        if (cell.trials_ok > 1) {
          const double var = sq.value() / static_cast<double>(cell.trials_ok - 1);
          cell.mc_stderr = std::sqrt(var / static_cast<double>(cell.trials_ok));
        }
        cell.rmse = std::sqrt(cell.mse);
      } else {
        cell.mse = cell.mc_stderr = cell.rmse = std::numeric_limits<double>::quiet_NaN();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_trial_report_csv(std::ostream& out, const TrialReport& report) {
  out << "graph_model,params,scenario,t_max,estimator,mse,mc_stderr,rmse,trials_ok,trials_failed\n";
  const std::string model = graph_model_name(report.config.graph_model);
  const std::string params =
      "n=" + std::to_string(report.config.n) + ";" + graph_model_params(report.config.graph_model);
  for (const auto& c : report.cells) {
    out << model << ',' << csv::quote(params) << ',' << to_string(report.config.scenario) << ','
        << c.t_max << ',' << csv::quote(c.estimator) << ',' << csv::format_double(c.mse) << ','
        << csv::format_double(c.mc_stderr) << ',' << csv::format_double(c.rmse) << ','
        << c.trials_ok << ',' << c.trials_failed << '\n';
  }
}

}  // namespace rtci
