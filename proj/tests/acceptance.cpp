// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "cli.hpp"
#include "rtci/error.hpp"
#include "rtci/estimators.hpp"
#include "rtci/inference.hpp"
#include "rtci/synth.hpp"
#include "support.hpp"

using namespace rtci;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double combined_se(const TrialCell& a, const TrialCell& b) {
  return std::sqrt(a.mc_stderr * a.mc_stderr + b.mc_stderr * b.mc_stderr);
}

NodeId first_with_neighbors(const Graph& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.num_nodes() - 1));
  for (;;) {
    const NodeId f = pick(rng);
    if (g.degree(f) > 0) return f;
  }
}

ModelSpec spec_for(Variant v, std::optional<NodeId> focal, std::optional<double> gamma = {}) {
  ModelSpec s;
  s.variant = v;
  s.focal = focal;
  s.gamma = gamma;
  return s;
}

double fit_gap(const FitResult& a, const FitResult& b) {
  if (a.beta.size() != b.beta.size()) return INFINITY;
  return std::max((a.beta - b.beta).cwiseAbs().maxCoeff(),
                  (a.covariance - b.covariance).cwiseAbs().maxCoeff());
}

// Independent AR simulator for the property checks (not the library's).
Panel ar_panel(const Graph& g, const std::vector<double>& b_i, const std::vector<double>& b_p,
               std::size_t steps, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Panel x(g.num_nodes(), steps);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) x(i, 0) = n01(rng);
  for (std::size_t t = 1; t < steps; ++t) {
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      double peer = 0.0;
      for (NodeId j : g.neighbors(i)) peer += x(j, t - 1);
      if (g.degree(i) > 0) peer /= static_cast<double>(g.degree(i));
      x(i, t) = b_i[i] * x(i, t - 1) + (b_p.empty() ? 0.0 : b_p[i] * peer) + sd * n01(rng);
    }
  }
  return x;
}

// 1. local(gamma = 0) == individual, local(gamma = 1) == global, both families.
Verdict reduction_identities() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int instances = 0;
  while (instances < 50) {
    const std::size_t n = 5 + rng() % 30;
    auto g = testing::random_graph(n, 0.1 + 0.3 * (rng() % 100) / 100.0, rng);
    if (g.num_edges() == 0) continue;
    auto x = testing::random_panel(n, 6 + rng() % 20, rng);
    const NodeId f = first_with_neighbors(g, rng);
    const bool icpt = instances % 2 == 1;
    auto run = [&](Variant v, std::optional<double> gamma) {
      auto s = spec_for(v, f, gamma);
      s.with_intercept = icpt;
      return fit(g, x, s);
    };
    worst = std::max(worst, fit_gap(run(Variant::local_individual, 0.0), run(Variant::individual, {})));
    worst = std::max(worst, fit_gap(run(Variant::local_individual, 1.0), run(Variant::global, {})));
    worst = std::max(worst, fit_gap(run(Variant::local_peer, 0.0), run(Variant::individual_peer, {})));
    worst = std::max(worst, fit_gap(run(Variant::local_peer, 1.0), run(Variant::global_peer, {})));
    ++instances;
  }
  return {worst <= 1e-12, fmt("50 instances x 4 identities, max |coef or cov diff| = %.3g (tol 1e-12)", worst)};
}

// 2. fit_wls against an explicit-W dense normal-equation oracle.
Verdict solver_oracle() {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> uw(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + rng() % 12;
    auto g = testing::random_graph(n, 0.4, rng);
    auto x = testing::random_panel(n, 8 + rng() % 10, rng);
    // p = 1 (own lag), 2 (own lag + intercept or peer), 3 (peer + intercept).
    DesignOptions opt;
    opt.with_peer = rep % 3 == 2 || (rep % 3 == 1 && rep % 2 == 0);
    opt.with_intercept = rep % 3 == 2 || (rep % 3 == 1 && rep % 2 == 1);
    const auto design = build_design(g, x, opt);
    if (design.rows() < 6) continue;
    std::vector<double> w(n);
    for (auto& v : w) v = 0.05 + uw(rng);
    const auto f = fit_wls(design, w);

    const auto rows = static_cast<Eigen::Index>(design.rows());
    const auto p = static_cast<Eigen::Index>(design.num_regressors);
    Eigen::MatrixXd Z(rows, p), W = Eigen::MatrixXd::Zero(rows, rows);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index k = 0; k < p; ++k) Z(r, k) = design.regressors(r)[k];
      y[r] = design.y[r];
      W(r, r) = w[design.node[r]];
    }
    const Eigen::MatrixXd A = Z.transpose() * W * Z;
    const Eigen::VectorXd beta = A.ldlt().solve(Z.transpose() * W * y);
    const Eigen::VectorXd e = y - Z * beta;
    const double sigma2 = (e.transpose() * W * e).value() / (W.trace() - static_cast<double>(p));
    const Eigen::MatrixXd cov = sigma2 * A.inverse();
    worst = std::max(worst, (f.beta - beta).cwiseAbs().maxCoeff());
    worst = std::max(worst, (f.covariance - cov).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("100 random designs p in {1,2,3}, max |diff| = %.3g (tol 1e-10)", worst)};
}

// 3. Noise-free panels recover beta exactly; ITS level shift and slope change.
Verdict noiseless_recovery() {
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  auto g = testing::random_graph(15, 0.3, rng);
  while (g.num_isolated() > 0) g = testing::random_graph(15, 0.3, rng);
  const NodeId f = 4;
  auto own = ar_panel(g, std::vector<double>(15, 0.5), {}, 12, 0.0, rng);
  auto peer = ar_panel(g, std::vector<double>(15, 0.5), std::vector<double>(15, 0.3), 8, 0.0, rng);
  for (Variant v : kAllVariants) {
    const auto gamma = is_local(v) ? std::optional<double>(0.2) : std::nullopt;
    const auto r = fit(g, is_peer(v) ? peer : own, spec_for(v, f, gamma));
    worst = std::max(worst, std::abs(r.beta[0] - 0.5));
    if (is_peer(v)) worst = std::max(worst, std::abs(r.beta[1] - 0.3));
  }

  // Level shift: 3, 0, ..., 0 up to t_int, then 5.
  auto lone = Graph::from_edges(1, {});
  Panel shift(1, 14);
  shift(0, 0) = 3.0;
  for (std::size_t t = 7; t < 14; ++t) shift(0, t) = 5.0;
  auto fs = fit_its(lone, shift, {spec_for(Variant::individual, 0), 6});
  worst = std::max({worst, std::abs(fs.beta[1]), std::abs(fs.beta[2] - 5.0)});

  // Slope 0.5 -> 0.8 after t_int on three nodes.
  auto three = Graph::from_edges(3, {});
  Panel slope(3, 16);
  for (std::size_t i = 0; i < 3; ++i) {
    slope(i, 0) = 1.0 + static_cast<double>(i);
    for (std::size_t t = 1; t < 16; ++t) slope(i, t) = (t > 8 ? 0.8 : 0.5) * slope(i, t - 1);
  }
  auto fc = fit_its(three, slope, {spec_for(Variant::global, std::nullopt), 8});
  worst = std::max({worst, std::abs(fc.beta[1] - 0.3), std::abs(fc.beta[2])});
  return {worst <= 1e-10, fmt("8 variants + ITS level/slope fixtures, max |error| = %.3g (tol 1e-10)", worst)};
}

void print_cells(const TrialReport& r, std::ostream& log) {
  for (const auto& c : r.cells) {
    log << "    " << graph_model_name(r.config.graph_model) << " T=" << c.t_max << ' '
        << c.estimator << " mse=" << c.mse << " se=" << c.mc_stderr << " ok=" << c.trials_ok
        << " failed=" << c.trials_failed << '\n';
  }
}

// 4. Small-sample ordering on ER, WS and BA, individual scenario.
Verdict individual_ordering(std::ostream& log) {
  const std::vector<GraphModel> models{ErdosRenyi{0.2}, WattsStrogatz{5, 0.2}, BarabasiAlbert{1.0, 2}};
  const std::vector<EstimatorSpec> est{make_estimator(Variant::local_individual, 0.05),
                                       make_estimator(Variant::individual)};
  const std::string loc = est[0].label, ind = est[1].label;
  TrialOptions opts;
  opts.trials = 500;
  opts.t_grid = {10, 30, 50, 100, 200};
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < models.size(); ++k) {
    SynthConfig cfg;
    cfg.graph_model = models[k];
    cfg.n = 100;
    cfg.seed = 4000 + k;
    const auto r = run_trials(cfg, est, opts);
    print_cells(r, log);
    bool ok = true;
    for (std::size_t t : {10u, 30u}) {
      const auto& a = r.at(t, loc);
      const auto& b = r.at(t, ind);
      ok = ok && b.mse - a.mse >= 2 * combined_se(a, b);
    }
    const auto& a200 = r.at(200, loc);
    const auto& b200 = r.at(200, ind);
    ok = ok && b200.mse <= 1.1 * a200.mse;
    pass = pass && ok;
    detail += fmt("%s: T10 loc %.4g vs ind %.4g, T30 loc %.4g vs ind %.4g, T200 ind/loc %.3g [%s]; ",
                  graph_model_name(models[k]).c_str(), r.at(10, loc).mse, r.at(10, ind).mse,
                  r.at(30, loc).mse, r.at(30, ind).mse, b200.mse / a200.mse, ok ? "ok" : "x");
  }
  return {pass, detail + "need loc < ind by 2 MC SE at T=10,30 and ind <= 1.1 loc at T=200"};
}

// 5. Small-sample ordering and large-T convergence, peer scenario.
Verdict peer_ordering(std::ostream& log) {
  const std::vector<EstimatorSpec> est{
      make_estimator(Variant::local_peer, 0.05), make_estimator(Variant::individual_peer),
      make_estimator(Variant::global_peer), make_estimator(Variant::neighbors_peer)};
  SynthConfig cfg;
  cfg.n = 100;
  cfg.scenario = Scenario::peer;
  cfg.seed = 5000;
  TrialOptions opts;
  opts.trials = 500;
  opts.t_grid = {10, 30, 50, 100, 200, 500};
  const auto r = run_trials(cfg, est, opts);
  print_cells(r, log);
  const auto& loc30 = r.at(30, est[0].label);
  const auto& ind30 = r.at(30, est[1].label);
  const bool early = ind30.mse - loc30.mse >= 2 * combined_se(loc30, ind30);
  bool late = true;
  std::size_t failed = 0;
  for (std::size_t a = 0; a < est.size(); ++a) {
    const auto& ca = r.at(500, est[a].label);
    failed += ca.trials_failed;
    late = late && ca.trials_ok > 0 && std::isfinite(ca.mse);
    for (std::size_t b = a + 1; b < est.size(); ++b) {
      const auto& cb = r.at(500, est[b].label);
      late = late && std::abs(ca.mse - cb.mse) <= 2 * combined_se(ca, cb);
    }
  }
  return {early && late,
          fmt("T30 ind_peer %.4g vs local_peer %.4g (need > by 2 MC SE) [%s]; T=500 all within 2 MC SE "
              "[%s], failed fits at T=500: %zu of %zu",
              ind30.mse, loc30.mse, early ? "ok" : "x", late ? "ok" : "x", failed,
              est.size() * opts.trials)};
}

// 6. Hausman size under a homogeneous process and power against two blocks.
Verdict hausman_calibration(std::ostream& log) {
  const double gamma = 1.0;
  const int trials = 1000;
  auto rejection_rate = [&](bool two_blocks, double g_local, std::uint64_t seed) {
    int rejected = 0, undefined = 0;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(derive_seed(seed, trial));
      // Two 15-node communities, dense inside, a few bridges.
      std::vector<Edge> e;
      std::bernoulli_distribution inside(0.3), across(0.02);
      for (NodeId i = 0; i < 30; ++i) {
        for (NodeId j = i + 1; j < 30; ++j) {
          if ((i < 15) == (j < 15) ? inside(rng) : across(rng)) e.push_back({i, j});
        }
      }
      auto g = Graph::from_edges(30, e);
      std::vector<double> b(30, 0.5);
      if (two_blocks) {
        for (NodeId i = 0; i < 30; ++i) b[i] = i < 15 ? 0.2 : 0.8;
      }
      auto x = ar_panel(g, b, {}, 100, 1.0, rng);
      const NodeId f = static_cast<NodeId>(rng() % 15);
      try {
        const auto local = fit(g, x, spec_for(Variant::local_individual, f, g_local));
        const auto ind = fit(g, x, spec_for(Variant::individual, f));
        rejected += hausman_test(local, ind).p_value < 0.05 ? 1 : 0;
      } catch (const TestUndefinedError&) {
        ++undefined;
      }
    }
    return std::pair{static_cast<double>(rejected) / trials, undefined};
  };
  const auto [size, size_undef] = rejection_rate(false, gamma, 6000);
  const auto [power, power_undef] = rejection_rate(true, gamma, 6001);
  const auto [size_05, undef_05] = rejection_rate(false, 0.05, 6002);
  log << "    supplementary: gamma=0.05 size under the homogeneous process = " << size_05
      << " (undefined " << undef_05 << ")\n";
  const bool pass = size >= 0.03 && size <= 0.08 && power >= 0.8;
  return {pass, fmt("gamma=%.3g, 1000 trials each: size %.3f in [0.03, 0.08] (undefined %d), power %.3f "
                    ">= 0.8 (undefined %d)",
                    gamma, size, size_undef, power, power_undef)};
}

// 7. Gamma sweep on a two-community graph: spread across focal nodes shrinks to 0 at gamma = 1.
Verdict gamma_sweep() {
  std::mt19937_64 rng(7007);
  std::vector<Edge> e;
  std::bernoulli_distribution inside(0.25), across(0.01);
  for (NodeId i = 0; i < 40; ++i) {
    for (NodeId j = i + 1; j < 40; ++j) {
      if ((i < 20) == (j < 20) ? inside(rng) : across(rng)) e.push_back({i, j});
    }
  }
  e.push_back({0, 20});
  auto g = Graph::from_edges(40, e);
  std::vector<double> b(40);
  for (NodeId i = 0; i < 40; ++i) b[i] = i < 20 ? 0.2 : 0.8;
  auto x = ar_panel(g, b, {}, 40, 1.0, rng);
  const std::vector<NodeId> focals{1, 3, 5, 7, 9, 21, 23, 25, 27, 29};
  auto spread = [&](double gamma) {
    double lo = INFINITY, hi = -INFINITY;
    for (NodeId f : focals) {
      const double v = fit(g, x, spec_for(Variant::local_individual, f, gamma)).beta[0];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  };
  const double s3 = spread(1e-3), s1 = spread(1e-1), s0 = spread(1.0);
  return {s0 <= 1e-9 && s3 > s1 && s1 > s0,
          fmt("10 focal nodes, spread at gamma 1e-3 %.4g > 1e-1 %.4g > 1 %.3g (<= 1e-9)", s3, s1, s0)};
}

// 8. chi-square survival function: df = 2 closed form and an extended-precision oracle.
Verdict chi_square_accuracy() {
  double closed = 0.0, oracle = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double x = 0.05 * std::pow(1.2, k);
    closed = std::max(closed, std::abs(chi_square_sf(x, 2) - std::exp(-x / 2)));
    const int df = 1 + (k * 7) % 40;
    const double xo = 0.1 + 2.0 * k;
    const long double ref = boost::math::gamma_q(static_cast<long double>(df) / 2, static_cast<long double>(xo) / 2);
    oracle = std::max(oracle, std::abs(chi_square_sf(xo, df) - static_cast<double>(ref)));
  }
  return {closed <= 1e-12 && oracle <= 1e-8,
          fmt("50 points: df=2 max err %.3g (tol 1e-12), incomplete-gamma oracle max err %.3g (tol 1e-8)",
              closed, oracle)};
}

// 9. bench twice with one seed: byte-identical CSV.
Verdict bench_determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "rtci_acceptance_bench";
  fs::create_directories(dir);
  auto run = [&](const std::string& name) {
    const auto out = (dir / name).string();
    std::ostringstream sink, err;
    const std::vector<std::string> args{"bench", "--graph-model", "barabasi_albert", "--n", "100",
                                        "--trials", "100", "--seed", "99", "--out", out};
    const int code = cli::run(args, sink, err);
    std::ifstream in(out, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return std::pair{code, s.str()};
  };
  const auto a = run("a.csv");
  const auto b = run("b.csv");
  fs::remove_all(dir);
  const bool pass = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  return {pass, fmt("exit codes %d/%d, %zu bytes, identical = %s", a.first, b.first, a.second.size(),
                    a.second == b.second ? "yes" : "no")};
}

// 10. Locality weights on a 1M-node / ~5M-edge BA graph.
Verdict scalability() {
  Rng rng(10010);
  auto g = gen_barabasi_albert(1'000'000, 1.0, 5, rng);
  BfsWorkspace ws(g.num_nodes());
  double worst = 0.0;
  std::size_t reached = 0;
  for (NodeId f : {NodeId{0}, NodeId{123'456}, NodeId{999'999}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto w = locality_weights(g, f, 0.1, {}, ws);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worst = std::max(worst, s);
    reached = std::max(reached, w.support.size());
  }
  return {worst < 10.0 && g.num_edges() >= 4'999'000,
          fmt("%zu nodes, %zu edges, gamma 0.1 cutoff 1e-8: slowest focal %.3f s (< 10 s), support %zu",
              g.num_nodes(), g.num_edges(), worst, reached)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  std::ostringstream log;
  const std::vector<Criterion> criteria{
      {1, "reduction identities", 5, reduction_identities},
      {2, "solver oracle equivalence", 5, solver_oracle},
      {3, "noiseless recovery", 5, noiseless_recovery},
      {4, "local vs individual ordering (ER, WS, BA)", 180, [&] { return individual_ordering(log); }},
      {5, "peer-scenario ordering and convergence", 300, [&] { return peer_ordering(log); }},
      {6, "Hausman calibration", 180, [&] { return hausman_calibration(log); }},
      {7, "gamma-sweep convergence", 10, gamma_sweep},
      {8, "chi-square accuracy", 1, chi_square_accuracy},
      {9, "bench determinism", 60, bench_determinism},
      {10, "scalability smoke test", 600, scalability},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    log.str("");
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_s;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s: %s; runtime %.2f s (limit %.0f s)\n", pass ? "PASS" : "FAIL",
                c.id, c.name, v.detail.c_str(), s, c.limit_s);
    if (!log.str().empty()) std::printf("%s", log.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
