#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <doctest.h>

#include "rtci/error.hpp"
#include "rtci/synth.hpp"
#include "support.hpp"

using namespace rtci;

namespace {

Graph two_cliques(std::size_t size) {
  std::vector<Edge> e;
  for (NodeId base : {NodeId{0}, static_cast<NodeId>(size)}) {
    for (NodeId i = 0; i < size; ++i) {
      for (NodeId j = i + 1; j < size; ++j) e.push_back({base + i, base + j});
    }
  }
  return Graph::from_edges(2 * size, e);
}

bool in_lattice(NodeId a, NodeId b, std::size_t n, std::size_t k) {
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, n - d) <= k;
}

}  // namespace

TEST_CASE("rng helpers") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_index(rng, 7) < 7);
  }
}

TEST_CASE("erdos-renyi") {
  Rng rng(1);
  CHECK(gen_erdos_renyi(10, 0.0, rng).num_edges() == 0);
  CHECK(gen_erdos_renyi(10, 1.0, rng).num_edges() == 45);
  // Edge count over a batch of seeds within 4 binomial SDs.
  const double pairs = 200.0 * 199.0 / 2.0;
  double total = 0.0;
  const int batch = 10;
  for (int s = 0; s < batch; ++s) {
    Rng r(derive_seed(99, s));
    auto g = gen_erdos_renyi(200, 0.2, r);
    CHECK(g.check_invariants());
    total += static_cast<double>(g.num_edges());
  }
  const double expect = batch * 0.2 * pairs;
  const double sd = std::sqrt(batch * pairs * 0.2 * 0.8);
  CHECK(std::abs(total - expect) < 4 * sd);
  CHECK_THROWS_AS(gen_erdos_renyi(10, 1.5, rng), UsageError);
}

TEST_CASE("watts-strogatz") {
  Rng rng(2);
  auto lattice = gen_watts_strogatz(30, 3, 0.0, rng);
  CHECK(lattice.num_edges() == 90);
  for (NodeId i = 0; i < 30; ++i) CHECK(lattice.degree(i) == 6);
  auto full = gen_watts_strogatz(20, 2, 1.0, rng);
  CHECK(full.num_edges() == 40);
  CHECK(full.check_invariants());
  CHECK_THROWS_AS(gen_watts_strogatz(10, 5, 0.1, rng), UsageError);
  CHECK_THROWS_AS(gen_watts_strogatz(10, 0, 0.1, rng), UsageError);

  // Fraction of edges off the lattice tracks p_rewire.
  const std::size_t n = 200, k = 5;
  double off = 0.0, total = 0.0;
  for (int s = 0; s < 20; ++s) {
    Rng r(derive_seed(3, s));
    auto g = gen_watts_strogatz(n, k, 0.2, r);
    CHECK(g.num_edges() == n * k);
    CHECK(g.check_invariants());
    for (const auto& [a, b] : g.edge_list()) {
      off += in_lattice(a, b, n, k) ? 0.0 : 1.0;
      total += 1.0;
    }
  }
  const double sd = std::sqrt(0.2 * 0.8 / total);
  CHECK(std::abs(off / total - 0.2) < 4 * sd);
}

TEST_CASE("barabasi-albert") {
  Rng rng(4);
  auto clique = gen_barabasi_albert(4, 1.0, 3, rng);
  CHECK(clique.num_edges() == 6);
  auto tree = gen_barabasi_albert(300, 1.0, 1, rng);
  CHECK(tree.num_edges() == 299);
  CHECK(tree.num_isolated() == 0);
  auto g = gen_barabasi_albert(500, 2.0, 3, rng);
  CHECK(g.check_invariants());
  CHECK(g.num_edges() == 3 * 2 + 3 * (500 - 4));
  CHECK_THROWS_AS(gen_barabasi_albert(3, 1.0, 3, rng), UsageError);
  CHECK_THROWS_AS(gen_barabasi_albert(30, 0.0, 2, rng), UsageError);

  // Heavy tail: max degree beats an ER graph of the same density.
  for (int s = 0; s < 5; ++s) {
    Rng a(derive_seed(8, s)), b(derive_seed(9, s));
    auto ba = gen_barabasi_albert(2000, 1.0, 2, a);
    const double density = 2.0 * static_cast<double>(ba.num_edges()) / (2000.0 * 1999.0);
    auto er = gen_erdos_renyi(2000, density, b);
    CHECK(ba.max_degree() > er.max_degree());
  }
}

TEST_CASE("generate_graph dispatches on the model") {
  Rng rng(6);
  CHECK(generate_graph(WattsStrogatz{2, 0.0}, 10, rng).num_edges() == 20);
  CHECK(graph_model_name(BarabasiAlbert{}) == "barabasi_albert");
  CHECK(graph_model_params(WattsStrogatz{5, 0.2}) == "k=5;p_rewire=0.2");
  SynthConfig cfg;
  cfg.graph_model = ErdosRenyi{0.0};
  cfg.n = 5;
  cfg.max_graph_attempts = 3;
  CHECK_THROWS_AS(generate_connected_support_graph(cfg, rng), EstimationError);
}

TEST_CASE("beta covariance is a symmetric PSD repair of the two-step transition") {
  Rng rng(10);
  auto g = gen_erdos_renyi(30, 0.2, rng);
  REQUIRE(g.num_isolated() == 0);
  auto sigma = beta_covariance(g);
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  CHECK(es.eigenvalues().minCoeff() >= 1e-6 - 1e-12);
  // Off-diagonal entries equal the symmetrized two-step transition.
  Eigen::MatrixXd a = testing::dense_adjacency(g);
  Eigen::MatrixXd p = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) p.row(i) /= a.row(i).sum();
  Eigen::MatrixXd t = p * p;
  Eigen::MatrixXd s = (t + t.transpose()) / 2;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (i != j) CHECK(std::abs(sigma(i, j) - s(i, j)) <= 1e-12);
    }
  }
  CHECK_THROWS(beta_covariance(Graph::from_edges(3, {})));
}

TEST_CASE("node betas: mean, covariance and block structure") {
  Rng rng(12);
  std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};
  auto k3 = Graph::from_edges(3, tri);
  double mean = 0.0;
  for (int d = 0; d < 10000; ++d) {
    auto b = draw_node_betas(k3, rng);
    mean += (b[0] + b[1] + b[2]) / 30000.0;
  }
  CHECK(std::abs(mean - 1.0) < 0.05);

  auto g = two_cliques(3);
  const Eigen::MatrixXd sigma = beta_covariance(g);
  const int draws = 50000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(6);
  for (int d = 0; d < draws; ++d) {
    auto b = draw_node_betas(g, rng, 1.0, 1.0);
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(b.data(), 6).array() - 1.0;
    first += v;
    sum += v * v.transpose();
  }
  const Eigen::MatrixXd cov = sum / draws;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double se =
          std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / draws);
      CHECK(std::abs(cov(i, j) - sigma(i, j)) < 5 * se);
      if ((i < 3) != (j < 3)) {
        CHECK(std::abs(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j))) < 0.05);
      }
    }
  }
}

TEST_CASE("simulate_panel: noiseless recursions") {
  Rng rng(14);
  auto g = testing::path_graph(3);
  std::vector<double> init{1.0, -2.0, 4.0};
  NodeCoefficients zero{{0, 0, 0}, {}};
  auto x0 = simulate_panel(g, zero, 5, 0.0, rng, std::span<const double>(init));
  for (std::size_t t = 1; t < 5; ++t) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(x0(i, t) == 0.0);
  }
  NodeCoefficients unit{{1, 1, 1}, {}};
  auto x1 = simulate_panel(g, unit, 5, 0.0, rng, std::span<const double>(init));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t t = 0; t < 5; ++t) CHECK(x1(i, t) == init[i]);
  }
  NodeCoefficients peer{{0.5, 0.2, -0.3}, {0.1, 0.4, 0.6}};
  auto xp = simulate_panel(g, peer, 2, 0.0, rng, std::span<const double>(init));
  CHECK(xp(0, 1) == doctest::Approx(0.5 * 1.0 + 0.1 * -2.0));
  CHECK(xp(1, 1) == doctest::Approx(0.2 * -2.0 + 0.4 * (1.0 + 4.0) / 2.0));
  CHECK(xp(2, 1) == doctest::Approx(-0.3 * 4.0 + 0.6 * -2.0));
}

TEST_CASE("simulate_panel: noiseless stable series decay") {
  Rng rng(16);
  auto g = gen_erdos_renyi(20, 0.3, rng);
  NodeCoefficients c;
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  for (int i = 0; i < 20; ++i) c.beta_i.push_back(u(rng));
  std::vector<double> init(20);
  for (auto& v : init) v = u(rng) * 5.0;
  auto x = simulate_panel(g, c, 30, 0.0, rng, std::span<const double>(init));
  double prev = 1e300;
  for (std::size_t t = 1; t < 30; ++t) {
    double m = 0.0;
    for (std::size_t i = 0; i < 20; ++i) m = std::max(m, std::abs(x(i, t)));
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("run_trials: single noiseless trial trace") {
  SynthConfig cfg;
  cfg.n = 30;
  cfg.noise_sd = 0.0;
  cfg.initial_sd = 1.0;
  cfg.seed = 42;
  std::vector<EstimatorSpec> est{make_estimator(Variant::individual),
                                 make_estimator(Variant::local_individual, 0.0),
                                 make_estimator(Variant::global)};
  TrialOptions opts;
  opts.trials = 1;
  opts.t_grid = {6};
  auto report = run_trials(cfg, est, opts);
  CHECK(report.at(6, "individual").mse <= 1e-20);
  CHECK(report.at(6, "local_individual[gamma=0]").mse <= 1e-20);
  CHECK(report.at(6, "global").mse > 1e-6);
  CHECK(report.at(6, "global").trials_ok == 1);
  CHECK_THROWS_AS(report.at(7, "global"), UsageError);

  // Replay the trial by hand: the global estimate's error matches.
  Rng rng(derive_seed(cfg.seed, 0));
  auto g = generate_connected_support_graph(cfg, rng);
  auto truth = draw_coefficients(g, cfg, rng);
  auto panel = simulate_panel(g, truth, 6, cfg, rng);
  auto focal = static_cast<NodeId>(uniform_index(rng, g.num_nodes()));
  ModelSpec s;
  s.variant = Variant::global;
  const double err = fit(g, panel, s).beta[0] - truth.beta_i[focal];
  CHECK(report.at(6, "global").mse == err * err);
}

TEST_CASE("run_trials: deterministic and independent of threading") {
  SynthConfig cfg;
  cfg.n = 25;
  cfg.seed = 7;
  cfg.true_beta_mean = 0.5;
  cfg.stationary_clip = 0.95;
  std::vector<EstimatorSpec> est{make_estimator(Variant::local_individual, 0.05),
                                 make_estimator(Variant::individual),
                                 make_estimator(Variant::neighbors)};
  TrialOptions opts;
  opts.trials = 12;
  opts.t_grid = {8, 20};
  auto a = run_trials(cfg, est, opts);
  opts.threads = 3;
  auto b = run_trials(cfg, est, opts);
  std::ostringstream sa, sb;
  write_trial_report_csv(sa, a);
  write_trial_report_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("graph_model,params,scenario,t_max,estimator,mse,mc_stderr,rmse,"
                       "trials_ok,trials_failed\n",
                       0) == 0);
  for (const auto& c : a.cells) {
    CHECK(c.trials_ok + c.trials_failed == 12);
    CHECK(c.mse >= 0.0);
    CHECK(c.rmse == std::sqrt(c.mse));
  }
}

TEST_CASE("run_trials: failures are counted, not dropped") {
  SynthConfig cfg;
  cfg.n = 10;
  cfg.seed = 3;
  // Lag 4 on 4-column prefixes leaves no design rows.
  auto e = make_estimator(Variant::individual);
  e.spec.lag = 4;
  TrialOptions opts;
  opts.trials = 3;
  opts.t_grid = {4};
  auto r = run_trials(cfg, std::vector<EstimatorSpec>{e}, opts);
  CHECK(r.cells[0].trials_failed == 3);
  CHECK(r.cells[0].trials_ok == 0);
}

TEST_CASE("run_trials: the individual estimator's MSE falls with series length") {
  SynthConfig cfg;
  cfg.n = 30;
  cfg.seed = 11;
  cfg.true_beta_mean = 0.5;
  cfg.stationary_clip = 0.95;
  std::vector<EstimatorSpec> est{make_estimator(Variant::individual)};
  TrialOptions opts;
  opts.trials = 300;
  opts.t_grid = {10, 30, 100};
  auto r = run_trials(cfg, est, opts);
  for (std::size_t k = 1; k < 3; ++k) {
    const auto& hi = r.at(opts.t_grid[k - 1], "individual");
    const auto& lo = r.at(opts.t_grid[k], "individual");
    CHECK(hi.mse - lo.mse > 2 * std::hypot(hi.mc_stderr, lo.mc_stderr));
  }
}
