#include "cli.hpp"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtci/csv.hpp"
#include "rtci/error.hpp"
#include "rtci/estimators.hpp"
#include "rtci/graph.hpp"
#include "rtci/inference.hpp"
#include "rtci/panel.hpp"
#include "rtci/synth.hpp"

namespace rtci::cli {

using json = nlohmann::json;

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitUndefined = 4;

struct Manifest {
  std::string command;
  json config = json::object();
  std::optional<std::uint64_t> seed;
  json inputs = json::array();
  json warnings = json::array();
};

// Writes to the --out file when given, else to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Inputs {
  EdgeListData edges;
  Panel panel;
};

Inputs load_inputs(const std::string& edge_path, const std::string& panel_path, Manifest& m) {
  Inputs in{load_edge_list_file(edge_path), Panel{}};
  in.panel = load_panel_csv_file(panel_path, in.edges.index);
  m.inputs.push_back({{"path", edge_path}, {"fnv1a64", file_digest(edge_path)}});
  m.inputs.push_back({{"path", panel_path}, {"fnv1a64", file_digest(panel_path)}});
  for (const auto& w : in.edges.warnings) m.warnings.push_back(w);
  return in;
}

NodeId resolve_node(const NodeIndex& index, const std::string& token) {
  auto id = index.find(token);
  if (!id) throw UsageError("unknown node '" + token + "'");
  return *id;
}

// Flags shared by every command that fits a model.
struct ModelArgs {
  std::string focal;
  std::optional<double> gamma;
  std::size_t lag = 1;
  bool intercept = false;
  bool robust = false;
  bool include_focal = false;

  void add_to(CLI::App* app, bool with_gamma = true) {
    app->add_option("--focal", focal, "Focal node token");
    if (with_gamma) {
      app->add_option("--gamma", gamma, "Locality decay (local variants, default 0.1)");
    }
    app->add_option("--lag", lag, "Lag w")->capture_default_str();
    app->add_flag("--intercept", intercept, "Add an intercept column");
    app->add_flag("--robust-cov", robust, "HC1 sandwich covariance");
    app->add_flag("--neighbors-include-focal", include_focal,
                  "neighbors variants also pool the focal node");
  }

  ModelSpec resolve(Variant v, const NodeIndex& index) const {
    ModelSpec spec;
    spec.variant = v;
    spec.gamma = gamma;
    if (is_local(v) && !spec.gamma) spec.gamma = 0.1;
    spec.lag = lag;
    spec.with_intercept = intercept;
    spec.robust_covariance = robust;
    spec.neighbors_include_focal = include_focal;
    if (!focal.empty()) spec.focal = resolve_node(index, focal);
    spec.validate();
    return spec;
  }
};

json spec_json(const ModelSpec& spec, const NodeIndex& index) {
  return {{"variant", to_string(spec.variant)},
          {"focal", spec.focal ? json(index.token(*spec.focal)) : json(nullptr)},
          {"gamma", optional_json(spec.gamma)},
          {"w", spec.lag},
          {"intercept", spec.with_intercept},
          {"robust_covariance", spec.robust_covariance},
          {"neighbors_include_focal", spec.neighbors_include_focal},
          {"cutoff_eps", spec.cutoff_eps}};
}

json fit_json(const FitResult& f, const ModelSpec& spec, const NodeIndex& index) {
  json j = spec_json(spec, index);
  j["terms"] = f.terms;
  j["beta"] = vector_json(f.beta);
  j["stderr"] = vector_json(f.standard_errors());
  j["cov"] = matrix_json(f.covariance);
  j["sigma2"] = f.sigma2;
  j["weighted_rss"] = f.weighted_rss;
  j["n_eff"] = f.n_eff;
  j["n_rows"] = f.n_rows;
  j["condition_number"] = f.condition_number;
  j["condition_warning"] = f.condition_warning;
  j["warnings"] = f.warnings;
  return j;
}

std::string term_header(const std::string& prefix, const std::vector<std::string>& terms) {
  std::string s;
  for (const auto& t : terms) s += "," + prefix + t;
  return s;
}

std::optional<std::size_t> env_threads() {
  const char* v = std::getenv(kThreadsEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  const double d = csv::parse_double(v, kThreadsEnv);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw UsageError(std::string(kThreadsEnv) + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(d);
}

TimeWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects BEGIN:END");
  const double b = csv::parse_double(text.substr(0, colon), "window begin");
  const double e = csv::parse_double(text.substr(colon + 1), "window end");
  if (b < 0 || e <= b || b != static_cast<std::size_t>(b) || e != static_cast<std::size_t>(e)) {
    throw UsageError("--window expects integers 0 <= BEGIN < END");
  }
  return {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

// ---- fit ----

struct FitArgs {
  std::string edges, panel, variant, out;
  ModelArgs model;
};

void cmd_fit(const FitArgs& a, Manifest& m, std::ostream& out) {
  const Variant v = parse_variant(a.variant);
  Inputs in = load_inputs(a.edges, a.panel, m);
  const ModelSpec spec = a.model.resolve(v, in.edges.index);
  m.config = spec_json(spec, in.edges.index);
  const FitResult f = fit(in.edges.graph, in.panel, spec);
  Sink sink(a.out, out);
  sink.get() << fit_json(f, spec, in.edges.index).dump(2) << '\n';
}

// ---- hausman ----

struct HausmanArgs {
  std::string edges, panel, out;
  ModelArgs model;
  bool peer = false;
};

json hausman_json(const HausmanResult& h) {
  return {{"H", h.statistic},
          {"df", h.df},
          {"p_value", h.p_value},
          {"psd_violation", h.psd_violation},
          {"identical_fits", h.identical_fits},
          {"beta_diff", vector_json(h.beta_diff)}};
}

void cmd_hausman(const HausmanArgs& a, Manifest& m, std::ostream& out) {
  Inputs in = load_inputs(a.edges, a.panel, m);
  const ModelSpec local =
      a.model.resolve(a.peer ? Variant::local_peer : Variant::local_individual, in.edges.index);
  ModelArgs ind_args = a.model;
  ind_args.gamma.reset();
  const ModelSpec ind =
      ind_args.resolve(a.peer ? Variant::individual_peer : Variant::individual, in.edges.index);
  m.config = spec_json(local, in.edges.index);
  const FitResult fl = fit(in.edges.graph, in.panel, local);
  const FitResult fi = fit(in.edges.graph, in.panel, ind);
  const HausmanResult h = hausman_test(fl, fi);
  json j = hausman_json(h);
  j["terms"] = fl.terms;
  j["focal"] = in.edges.index.token(*local.focal);
  j["gamma"] = *local.gamma;
  Sink sink(a.out, out);
  sink.get() << j.dump(2) << '\n';
}

// ---- sliding ----

struct SlidingArgs {
  std::string edges, panel, variant = "local_individual", out;
  ModelArgs model;
  std::size_t window = 0;
  std::size_t stride = 1;
  bool scale = false;
};

void cmd_sliding(const SlidingArgs& a, Manifest& m, std::ostream& out) {
  const Variant v = parse_variant(a.variant);
  Inputs in = load_inputs(a.edges, a.panel, m);
  const ModelSpec spec = a.model.resolve(v, in.edges.index);
  m.config = spec_json(spec, in.edges.index);
  m.config["window"] = a.window;
  m.config["stride"] = a.stride;
  m.config["scale"] = a.scale;
  const Panel panel = a.scale ? minmax_scale_rows(in.panel) : in.panel;
  const auto series = sliding_beta_series(in.edges.graph, panel, spec, a.window, a.stride);
  const auto deltas = beta_deltas(series);
  const auto& terms = series.front().fit.terms;

  Sink sink(a.out, out);
  std::ostream& o = sink.get();
  o << "t_start" << term_header("beta_", terms) << term_header("stderr_", terms)
    << term_header("delta_", terms) << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    const FitResult& f = series[k].fit;
    const Eigen::VectorXd se = f.standard_errors();
    o << series[k].t_start;
    for (Eigen::Index r = 0; r < f.beta.size(); ++r) o << ',' << csv::format_double(f.beta[r]);
    for (Eigen::Index r = 0; r < se.size(); ++r) o << ',' << csv::format_double(se[r]);
    for (Eigen::Index r = 0; r < f.beta.size(); ++r) {
      o << ',';
      if (k < deltas.size()) o << csv::format_double(deltas[k][r]);
    }
    o << '\n';
  }
}

// ---- diffrank ----

struct DiffrankArgs {
  std::string panel, window, out;
  std::size_t top_k = 0;
};

void cmd_diffrank(const DiffrankArgs& a, Manifest& m, std::ostream& out) {
  const PanelData data = load_panel_csv_file(a.panel);
  m.inputs.push_back({{"path", a.panel}, {"fnv1a64", file_digest(a.panel)}});
  std::optional<TimeWindow> window;
  if (!a.window.empty()) window = parse_window(a.window);
  m.config = {{"window", a.window.empty() ? json(nullptr) : json(a.window)},
              {"top_k", a.top_k == 0 ? json(nullptr) : json(a.top_k)}};
  const auto rank = difference_rank(data.panel, window);
  const std::size_t k = a.top_k == 0 ? rank.size() : a.top_k;
  const auto order = top_k_by_rank(rank, k);
  Sink sink(a.out, out);
  write_rank_csv(sink.get(), rank, order, data.index);
}

// ---- synthetic configuration shared by bench and simulate ----

struct SynthArgs {
  std::string graph_model = "erdos_renyi";
  std::size_t n = 100;
  std::string scenario = "individual";
  std::uint64_t seed = 0;
  double er_p = 0.2;
  std::size_t ws_k = 5;
  double ws_p = 0.2;
  double ba_power = 1.0;
  std::size_t ba_m = 2;
  double beta_mean = 1.0;
  double beta_scale = 1.0;
  std::optional<double> clip;
  std::optional<double> peer_beta;
  double noise_sd = 1.0;
  std::optional<double> initial_sd;
  bool fixed_graph = false;

  void add_to(CLI::App* app) {
    app->add_option("--graph-model", graph_model, "erdos_renyi|watts_strogatz|barabasi_albert")
        ->capture_default_str();
    app->add_option("--n", n, "Number of nodes")->capture_default_str();
    app->add_option("--scenario", scenario, "individual|peer")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--er-p", er_p, "Erdos-Renyi edge probability")->capture_default_str();
    app->add_option("--ws-k", ws_k, "Watts-Strogatz neighbors per side")->capture_default_str();
    app->add_option("--ws-p", ws_p, "Watts-Strogatz rewiring probability")
        ->capture_default_str();
    app->add_option("--ba-power", ba_power, "Barabasi-Albert attachment power")
        ->capture_default_str();
    app->add_option("--ba-m", ba_m, "Barabasi-Albert edges per new node")
        ->capture_default_str();
    app->add_option("--beta-mean", beta_mean, "Mean of the drawn coefficients")
        ->capture_default_str();
    app->add_option("--beta-scale", beta_scale, "Scale of the coefficient deviations")
        ->capture_default_str();
    app->add_option("--clip", clip, "Clamp drawn coefficients into [-clip, clip]");
    app->add_option("--peer-beta", peer_beta, "Constant peer coefficient");
    app->add_option("--noise-sd", noise_sd, "Innovation standard deviation")
        ->capture_default_str();
    app->add_option("--initial-sd", initial_sd, "First-column standard deviation");
    app->add_flag("--fixed-graph", fixed_graph, "One graph for all trials");
  }

  SynthConfig resolve() const {
    SynthConfig c;
    if (graph_model == "erdos_renyi" || graph_model == "er") {
      c.graph_model = ErdosRenyi{er_p};
    } else if (graph_model == "watts_strogatz" || graph_model == "ws") {
      c.graph_model = WattsStrogatz{ws_k, ws_p};
    } else if (graph_model == "barabasi_albert" || graph_model == "ba") {
      c.graph_model = BarabasiAlbert{ba_power, ba_m};
    } else {
      throw UsageError("unknown graph model '" + graph_model + "'");
    }
    c.n = n;
    c.scenario = parse_scenario(scenario);
    c.true_beta_mean = beta_mean;
    c.beta_scale = beta_scale;
    c.stationary_clip = clip;
    c.peer_beta_constant = peer_beta;
    c.noise_sd = noise_sd;
    c.initial_sd = initial_sd;
    c.seed = seed;
    c.fixed_graph = fixed_graph;
    c.validate();
    return c;
  }
};

json synth_json(const SynthConfig& c) {
  return {{"graph_model", graph_model_name(c.graph_model)},
          {"graph_params", graph_model_params(c.graph_model)},
          {"n", c.n},
          {"scenario", to_string(c.scenario)},
          {"beta_mean", c.true_beta_mean},
          {"beta_scale", c.beta_scale},
          {"clip", optional_json(c.stationary_clip)},
          {"peer_beta", optional_json(c.peer_beta_constant)},
          {"noise_sd", c.noise_sd},
          {"initial_sd", optional_json(c.initial_sd)},
          {"seed", c.seed},
          {"fixed_graph", c.fixed_graph}};
}

// ---- bench ----

struct BenchArgs {
  SynthArgs synth;
  std::vector<std::size_t> t_grid = {10, 30, 50, 100, 200};
  std::size_t trials = 100;
  std::vector<double> gammas = {0.05};
  std::vector<std::string> estimators;
  std::optional<std::size_t> threads;
  std::string out;
};

std::vector<EstimatorSpec> bench_estimators(const BenchArgs& a, Scenario scenario) {
  std::vector<std::string> names = a.estimators;
  if (names.empty()) {
    if (scenario == Scenario::peer) {
      names = {"local_peer", "individual_peer", "global_peer", "neighbors_peer"};
    } else {
      names = {"local_individual", "individual", "global", "neighbors"};
    }
  }
  std::vector<EstimatorSpec> out;
  for (const auto& name : names) {
    const Variant v = parse_variant(name);
    if (is_local(v)) {
      for (double g : a.gammas) out.push_back(make_estimator(v, g));
    } else {
      out.push_back(make_estimator(v));
    }
  }
  return out;
}

void cmd_bench(const BenchArgs& a, Manifest& m, std::ostream& out) {
  const SynthConfig config = a.synth.resolve();
  const auto estimators = bench_estimators(a, config.scenario);
  TrialOptions opts;
  opts.trials = a.trials;
  opts.t_grid = a.t_grid;
  opts.threads = a.threads ? *a.threads : env_threads().value_or(1);
  m.seed = config.seed;
  m.config = synth_json(config);
  m.config["t_grid"] = a.t_grid;
  m.config["trials"] = a.trials;
  m.config["threads"] = opts.threads;
  json labels = json::array();
  for (const auto& e : estimators) labels.push_back(e.label);
  m.config["estimators"] = labels;
  const TrialReport report = run_trials(config, estimators, opts);
  Sink sink(a.out, out);
  write_trial_report_csv(sink.get(), report);
}

// ---- gamma-sweep ----

struct SweepArgs {
  std::string edges, panel, out;
  std::vector<std::string> focals;
  std::vector<double> gammas = {1e-3, 1e-2, 1e-1, 1.0};
  ModelArgs model;
  bool peer = false;
};

void cmd_gamma_sweep(const SweepArgs& a, Manifest& m, std::ostream& out) {
  Inputs in = load_inputs(a.edges, a.panel, m);
  const Graph& g = in.edges.graph;
  std::vector<NodeId> focals;
  for (const auto& t : a.focals) focals.push_back(resolve_node(in.edges.index, t));
  if (focals.empty()) throw UsageError("--focal-list is empty");
  m.config = {{"focal_list", a.focals}, {"gammas", a.gammas}, {"lag", a.model.lag},
              {"intercept", a.model.intercept}, {"peer", a.peer}};

  BfsWorkspace ws(g.num_nodes());
  std::vector<std::string> rows;
  std::vector<std::string> terms;
  for (NodeId f : focals) {
    for (double gamma : a.gammas) {
      ModelArgs args = a.model;
      args.focal = in.edges.index.token(f);
      args.gamma = gamma;
      const ModelSpec spec =
          args.resolve(a.peer ? Variant::local_peer : Variant::local_individual, in.edges.index);
      const FitResult r = fit(g, in.panel, spec, ws);
      terms = r.terms;
      std::string row = csv::quote(in.edges.index.token(f)) + "," + csv::format_double(gamma);
      for (Eigen::Index k = 0; k < r.beta.size(); ++k) row += "," + csv::format_double(r.beta[k]);
      rows.push_back(std::move(row));
    }
  }
  Sink sink(a.out, out);
  sink.get() << "focal,gamma" << term_header("beta_", terms) << '\n';
  for (const auto& r : rows) sink.get() << r << '\n';
}

// ---- its ----

struct ItsArgs {
  std::string edges, panel, scope = "individual", out, mode = "trajectory";
  ModelArgs model;
  std::size_t t_int = 0;
  std::size_t horizon = 0;
  std::vector<std::string> effect_nodes;
};

void cmd_its(const ItsArgs& a, Manifest& m, std::ostream& out) {
  Inputs in = load_inputs(a.edges, a.panel, m);
  ItsSpec spec;
  spec.scope = a.model.resolve(parse_variant(a.scope), in.edges.index);
  spec.t_int = a.t_int;
  EffectMode mode;
  if (a.mode == "trajectory") {
    mode = EffectMode::trajectory;
  } else if (a.mode == "one_step") {
    mode = EffectMode::one_step;
  } else {
    throw UsageError("unknown effect mode '" + a.mode + "'");
  }
  std::vector<NodeId> nodes;
  for (const auto& t : a.effect_nodes) nodes.push_back(resolve_node(in.edges.index, t));
  if (nodes.empty()) {
    if (spec.scope.focal) {
      nodes.push_back(*spec.scope.focal);
    } else {
      for (NodeId i = 0; i < in.panel.num_nodes(); ++i) nodes.push_back(i);
    }
  }
  const std::size_t horizon = a.horizon == 0 ? in.panel.num_steps() - 1 - a.t_int : a.horizon;
  m.config = spec_json(spec.scope, in.edges.index);
  m.config["t_int"] = a.t_int;
  m.config["horizon"] = horizon;
  m.config["mode"] = a.mode;

  const FitResult f = fit_its(in.edges.graph, in.panel, spec);
  const ItsEffect eff = its_effect(f, in.panel, spec, horizon, nodes, mode);
  json j = fit_json(f, spec.scope, in.edges.index);
  j["t_int"] = a.t_int;
  json tokens = json::array();
  for (NodeId i : eff.nodes) tokens.push_back(in.edges.index.token(i));
  j["effect"] = {{"mode", a.mode},
                 {"horizon", horizon},
                 {"nodes", tokens},
                 {"per_node", eff.per_node},
                 {"aggregate", eff.aggregate}};
  Sink sink(a.out, out);
  sink.get() << j.dump(2) << '\n';
}

// ---- simulate ----

struct SimulateArgs {
  SynthArgs synth;
  std::size_t t_max = 50;
  std::string edges_out, panel_out, betas_out;
};

void cmd_simulate(const SimulateArgs& a, Manifest& m, std::ostream& out) {
  const SynthConfig config = a.synth.resolve();
  m.seed = config.seed;
  m.config = synth_json(config);
  m.config["t_max"] = a.t_max;
  if (a.edges_out.empty() || a.panel_out.empty()) {
    throw UsageError("simulate needs --edges-out and --panel-out");
  }
  Rng rng(derive_seed(config.seed, 0));
  const Graph g = generate_connected_support_graph(config, rng);
  const NodeCoefficients coefs = draw_coefficients(g, config, rng);
  const Panel panel = simulate_panel(g, coefs, a.t_max, config, rng);
  const NodeIndex index = NodeIndex::numbered(g.num_nodes());
  {
    Sink s(a.edges_out, out);
    write_edge_list(s.get(), g, index);
  }
  {
    Sink s(a.panel_out, out);
    write_panel_csv(s.get(), panel, index);
  }
  if (!a.betas_out.empty()) {
    Sink s(a.betas_out, out);
    s.get() << "node,beta_i,beta_p\n";
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      s.get() << index.token(i) << ',' << csv::format_double(coefs.beta_i[i]) << ',';
      if (!coefs.beta_p.empty()) s.get() << csv::format_double(coefs.beta_p[i]);
      s.get() << '\n';
    }
  }
}

void emit_error(std::ostream& err, std::string_view kind, const std::string& message, int code,
                json extra = json::object()) {
  json j = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  j.update(extra);
  err << json{{"error", j}}.dump() << '\n';
}

// Dimension mismatches come from the inputs (lag past the series end, unknown
// focal), so they share the usage code.
int exit_code_for(const Error& e) {
  if (dynamic_cast<const EstimationError*>(&e) != nullptr) return kExitEstimation;
  return kExitUsage;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Local causal effects on graph-attributed time series", "rtci"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::string manifest_path;
  app.add_option("--manifest", manifest_path,
                 "Run manifest path (default: <out>.manifest.json, else stderr)");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model variant at a focal node");
  fit_cmd->add_option("EDGES", fit_args.edges, "Edge list")->required();
  fit_cmd->add_option("PANEL", fit_args.panel, "Panel CSV")->required();
  fit_cmd->add_option("VARIANT", fit_args.variant, "Model variant")->required();
  fit_args.model.add_to(fit_cmd);
  fit_cmd->add_option("--out", fit_args.out, "Output JSON path");

  HausmanArgs h_args;
  auto* h_cmd = app.add_subcommand("hausman", "Local vs individual specification test");
  h_cmd->add_option("EDGES", h_args.edges, "Edge list")->required();
  h_cmd->add_option("PANEL", h_args.panel, "Panel CSV")->required();
  h_args.model.add_to(h_cmd);
  h_cmd->add_flag("--peer", h_args.peer, "Compare the peer variants");
  h_cmd->add_option("--out", h_args.out, "Output JSON path");

  SlidingArgs s_args;
  auto* s_cmd = app.add_subcommand("sliding", "Coefficients over sliding windows");
  s_cmd->add_option("EDGES", s_args.edges, "Edge list")->required();
  s_cmd->add_option("PANEL", s_args.panel, "Panel CSV")->required();
  s_cmd->add_option("--variant", s_args.variant, "Model variant")->capture_default_str();
  s_args.model.add_to(s_cmd);
  s_cmd->add_option("--window", s_args.window, "Window length")->required();
  s_cmd->add_option("--stride", s_args.stride, "Window stride")->capture_default_str();
  s_cmd->add_flag("--scale", s_args.scale, "Min-max scale each node's series first");
  s_cmd->add_option("--out", s_args.out, "Output CSV path");

  DiffrankArgs d_args;
  auto* d_cmd = app.add_subcommand("diffrank", "Rank nodes by max - min over a window");
  d_cmd->add_option("PANEL", d_args.panel, "Panel CSV")->required();
  d_cmd->add_option("--window", d_args.window, "BEGIN:END column range, END exclusive");
  d_cmd->add_option("--top-k", d_args.top_k, "Keep the k highest (default: all)");
  d_cmd->add_option("--out", d_args.out, "Output CSV path");

  BenchArgs b_args;
  auto* b_cmd = app.add_subcommand("bench", "Monte Carlo MSE of the estimators");
  b_args.synth.add_to(b_cmd);
  b_cmd->add_option("--tmax-grid", b_args.t_grid, "Comma-separated series lengths")
      ->delimiter(',')
      ->capture_default_str();
  b_cmd->add_option("--trials", b_args.trials, "Trials")->capture_default_str();
  b_cmd->add_option("--gamma", b_args.gammas, "Comma-separated gammas for local estimators")
      ->delimiter(',')
      ->capture_default_str();
  b_cmd->add_option("--estimators", b_args.estimators, "Comma-separated variants")
      ->delimiter(',');
  b_cmd->add_option("--threads", b_args.threads,
                    std::string("Worker threads, 0 = all cores (default $") + kThreadsEnv +
                        " or 1)");
  b_cmd->add_option("--out", b_args.out, "Output CSV path");

  SweepArgs g_args;
  auto* g_cmd = app.add_subcommand("gamma-sweep", "Local fits over a grid of gammas");
  g_cmd->add_option("EDGES", g_args.edges, "Edge list")->required();
  g_cmd->add_option("PANEL", g_args.panel, "Panel CSV")->required();
  g_cmd->add_option("--focal-list", g_args.focals, "Comma-separated focal tokens")
      ->delimiter(',')
      ->required();
  g_cmd->add_option("--gammas", g_args.gammas, "Comma-separated gammas")
      ->delimiter(',')
      ->capture_default_str();
  g_args.model.add_to(g_cmd, false);
  g_cmd->add_flag("--peer", g_args.peer, "Sweep local_peer instead of local_individual");
  g_cmd->add_option("--out", g_args.out, "Output CSV path");

  ItsArgs i_args;
  auto* i_cmd = app.add_subcommand("its", "Interrupted time series effect");
  i_cmd->add_option("EDGES", i_args.edges, "Edge list")->required();
  i_cmd->add_option("PANEL", i_args.panel, "Panel CSV")->required();
  i_cmd->add_option("--t-int", i_args.t_int, "Last untreated column (0-based)")->required();
  i_cmd->add_option("--scope", i_args.scope, "Non-peer variant")->capture_default_str();
  i_args.model.add_to(i_cmd);
  i_cmd->add_option("--horizon", i_args.horizon, "Post columns summed (default: all)");
  i_cmd->add_option("--effect-nodes", i_args.effect_nodes, "Comma-separated tokens")
      ->delimiter(',');
  i_cmd->add_option("--mode", i_args.mode, "trajectory|one_step")->capture_default_str();
  i_cmd->add_option("--out", i_args.out, "Output JSON path");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Write one synthetic graph and panel");
  sim_args.synth.add_to(sim_cmd);
  sim_cmd->add_option("--tmax", sim_args.t_max, "Series length")->capture_default_str();
  sim_cmd->add_option("--edges-out", sim_args.edges_out, "Edge list path");
  sim_cmd->add_option("--panel-out", sim_args.panel_out, "Panel CSV path");
  sim_cmd->add_option("--betas-out", sim_args.betas_out, "True coefficients CSV path");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("rtci");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    emit_error(err, "usage_error", e.what(), kExitUsage);
    return kExitUsage;
  }

  Manifest m;
  std::string out_path;
  for (const auto& a : args) m.command += (m.command.empty() ? "" : " ") + a;
  try {
    if (fit_cmd->parsed()) {
      cmd_fit(fit_args, m, out);
      out_path = fit_args.out;
    } else if (h_cmd->parsed()) {
      cmd_hausman(h_args, m, out);
      out_path = h_args.out;
    } else if (s_cmd->parsed()) {
      cmd_sliding(s_args, m, out);
      out_path = s_args.out;
    } else if (d_cmd->parsed()) {
      cmd_diffrank(d_args, m, out);
      out_path = d_args.out;
    } else if (b_cmd->parsed()) {
      cmd_bench(b_args, m, out);
      out_path = b_args.out;
    } else if (g_cmd->parsed()) {
      cmd_gamma_sweep(g_args, m, out);
      out_path = g_args.out;
    } else if (i_cmd->parsed()) {
      cmd_its(i_args, m, out);
      out_path = i_args.out;
    } else if (sim_cmd->parsed()) {
      cmd_simulate(sim_args, m, out);
      out_path = sim_args.panel_out;
    }
  } catch (const TestUndefinedError& e) {
    emit_error(err, e.kind(), e.what(), kExitUndefined,
               {{"status", "test_undefined"},
                {"psd_violation", e.psd_violation()},
                {"beta_diff", vector_json(e.beta_diff())}});
    return kExitUndefined;
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    emit_error(err, e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kExitEstimation);
    return kExitEstimation;
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const json manifest = {{"tool", "rtci"},
                         {"version", kVersion},
                         {"command", m.command},
                         {"config", m.config},
                         {"seed", m.seed ? json(*m.seed) : json(nullptr)},
                         {"inputs", m.inputs},
                         {"warnings", m.warnings},
                         {"duration_seconds", seconds}};
  if (manifest_path.empty() && !out_path.empty()) manifest_path = out_path + ".manifest.json";
  if (manifest_path.empty()) {
    err << manifest.dump() << '\n';
  } else {
    std::ofstream f(manifest_path, std::ios::binary);
    if (!f) {
      emit_error(err, "usage_error", "cannot write '" + manifest_path + "'", kExitUsage);
      return kExitUsage;
    }
    f << manifest.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace rtci::cli
