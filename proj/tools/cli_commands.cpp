#include "cli_commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpseq/lpseq.hpp"

namespace lpseq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

double parse_p(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF") return kInf;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_parameter, "cannot parse p from '" + text + "'");
  }
  require(used == text.size(), ErrorKind::invalid_parameter, "trailing characters after p");
  require(p >= 0.0 && std::isfinite(p), ErrorKind::invalid_parameter, "p must be in [0, inf]");
  return p;
}

std::vector<double> parse_vector(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream is(normalized);
  std::vector<double> out;
  std::string token;
  while (is >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_parameter, "cannot parse '" + token + "' as a number");
    }
    require(used == token.size(), ErrorKind::invalid_parameter, "malformed number in input");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::empty_input, "input vector is empty");
  return out;
}

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::bracket_failure:
    case ErrorKind::degenerate_input:
      return kSolverFailure;
    default:
      return kUsage;
  }
}

json p_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

std::string join(const Vector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// project

struct ProjectArgs {
  std::string p = "2";
  double radius = 1.0;
  std::size_t sparsity = 0;
  std::string input;
  double tol = 1e-10;
  std::string format = "text";
};

int cmd_project(const ProjectArgs& a, std::ostream& out, std::ostream& err) {
  const double p = parse_p(a.p);
  std::string text = a.input;
  if (fs::is_regular_file(a.input)) {
    std::ifstream f(a.input);
    std::stringstream buf;
    buf << f.rdbuf();
    text = buf.str();
  }
  const Vector y = parse_vector(text);
  LpBall ball;
  if (p == 0.0) {
    require(a.sparsity >= 1, ErrorKind::invalid_parameter, "--p 0 needs --sparsity s >= 1");
    ball = LpBall::sparse(a.sparsity, y.size());
  } else {
    ball = LpBall::norm_ball(p, a.radius, y.size());
  }
  require(a.tol > 0.0, ErrorKind::invalid_parameter, "--tol must be > 0");
  err << "config: " << json{{"p", p_json(p)}, {"radius", a.radius}, {"sparsity", a.sparsity}, {"d", y.size()},
                           {"tol", a.tol}}.dump()
      << '\n';

  ProjectionOptions opt;
  opt.dual_tol = a.tol;
  const auto res = project(ball, y, opt);

  if (a.format == "json") {
    json j{{"point", res.point}, {"multiplier", res.multiplier}, {"kkt_residual", res.kkt_residual},
           {"iterations", res.iterations}};
    if (res.duality_gap) j["duality_gap"] = *res.duality_gap;
    out << j.dump() << '\n';
  } else {
    out << "point: " << join(res.point) << '\n'
        << "multiplier: " << format_real(res.multiplier) << '\n'
        << "kkt_residual: " << format_real(res.kkt_residual) << '\n'
        << "iterations: " << res.iterations << '\n';
    if (res.duality_gap) out << "duality_gap: " << format_real(*res.duality_gap) << '\n';
  }
  if (res.kkt_residual > 10.0 * a.tol && p >= 1.0) {
    err << "error: kkt residual " << res.kkt_residual << " exceeds 10 * tol\n";
    return kSolverFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// rates

struct RatesArgs {
  std::string p = "2";
  double d = 1.0;
  std::optional<double> sigma;
  double radius = 1.0;
  double sparsity = 1.0;
  std::size_t n = 1;
  std::optional<double> tau;
  std::string scenario;
  double delta = 0.5;
  std::string format = "text";
};

int cmd_rates(const RatesArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.scenario.empty()) {
    const auto row = example_scalings(parse_scenario(a.scenario), static_cast<double>(a.n), a.delta);
    err << "config: " << json{{"scenario", a.scenario}, {"n", a.n}, {"delta", a.delta}}.dump() << '\n';
    json j{{"n", row.n}, {"d", row.d}, {"p", row.p}, {"minimax", row.minimax}, {"mle_risk", row.mle_risk},
           {"ratio", row.ratio()}};
    if (a.format == "json") {
      out << j.dump() << '\n';
    } else {
      for (auto& [k, v] : j.items()) out << k << ": " << format_real(v.get<double>()) << '\n';
    }
    return kOk;
  }
  RateQuery q;
  q.p = parse_p(a.p);
  q.d = a.d;
  q.radius = a.radius;
  q.sparsity = a.sparsity;
  q.samples = a.n;
  q.tau = a.tau;
  if (!a.tau) {
    require(a.sigma.has_value(), ErrorKind::invalid_parameter, "need --sigma, or --tau with --n");
    q.sigma = *a.sigma;
  }
  const auto rep = classify_regime(q);
  json cfg{{"p", p_json(q.p)}, {"d", q.d}, {"sigma", q.effective_sigma()}, {"radius", q.radius}, {"n", q.samples}};
  if (q.p == 0.0) cfg["sparsity"] = q.sparsity;
  err << "config: " << cfg.dump() << '\n';

  json j{{"control", rep.bounds.control},
         {"lower", rep.bounds.lower},
         {"upper", rep.bounds.upper},
         {"two_sided", rep.bounds.two_sided},
         {"label", std::string(to_string(rep.label))},
         {"p_threshold", rep.p_threshold},
         {"sigma_interval", {rep.sigma_lo, rep.sigma_hi}},
         {"subinterval", std::string(to_string(rep.subinterval))}};
  if (a.format == "json") {
    out << j.dump() << '\n';
    return kOk;
  }
  out << "control: " << format_real(rep.bounds.control) << '\n'
      << "lower: " << format_real(rep.bounds.lower) << '\n'
      << "upper: " << format_real(rep.bounds.upper) << '\n'
      << "two_sided: " << (rep.bounds.two_sided ? "yes" : "no (upper constant only)") << '\n'
      << "label: " << to_string(rep.label) << '\n'
      << "p_threshold: " << format_real(rep.p_threshold) << '\n'
      << "sigma_interval: (" << format_real(rep.sigma_lo) << ", " << format_real(rep.sigma_hi) << ")\n"
      << "subinterval: " << to_string(rep.subinterval) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate / reproduce

struct RunFiles {
  fs::path csv;
  fs::path cursor;
};

/// Runs `c` writing rows to files.csv as they finish. With `resume`, continues
/// from files.cursor and returns previously written rows together with the new ones.
int run_with_cursor(const ExperimentConfig& c, const RunFiles& files, bool resume, std::ostream& err,
                    std::vector<RiskEstimate>& all_rows, ExperimentResult& result) {
  std::size_t start = 0;
  if (resume && fs::exists(files.cursor)) {
    std::ifstream cf(files.cursor);
    const json cj = json::parse(cf);
    start = cj.at("next_cell").get<std::size_t>();
    std::ifstream in(files.csv);
    all_rows = read_csv_rows(in);
    err << "resuming at cell " << start << " with " << all_rows.size() << " rows\n";
  }
  std::ofstream csv(files.csv, start > 0 ? std::ios::app : std::ios::trunc);
  require(static_cast<bool>(csv), ErrorKind::invalid_parameter, "cannot open output file");
  if (start == 0) csv << kCsvHeader << '\n';
  result = run_experiment(c, start, [&](const RiskEstimate& r) {
    write_csv_row(csv, c, r);
    csv.flush();
    err << "  d=" << r.d << " " << to_string(r.estimator) << " mse=" << format_real(r.mse_mean) << '\n';
  });
  all_rows.insert(all_rows.end(), result.rows.begin(), result.rows.end());
  if (!result.complete()) {
    std::ofstream cf(files.cursor);
    cf << json{{"next_cell", result.next_cell}, {"total_cells", result.total_cells}}.dump() << '\n';
    err << "error: " << result.error.value_or("incomplete") << "; resume with --resume\n";
    return kPartial;
  }
  if (fs::exists(files.cursor)) fs::remove(files.cursor);
  return kOk;
}

/// Minimax reference anchored to the first MLE point of the full grid.
json reference_json(const ExperimentResult& result, const std::vector<RiskEstimate>& rows, double& anchor) {
  anchor = 0.0;
  if (!result.reference.empty()) {
    for (const auto& r : rows) {
      if (r.estimator == EstimatorKind::mle && r.d == result.reference.front().d) {
        anchor = r.mse_mean / result.reference.front().control;
        break;
      }
    }
  }
  json ref = json::array();
  for (const auto& pt : result.reference) {
    ref.push_back({{"d", pt.d}, {"sigma", pt.sigma}, {"control", pt.control}, {"anchored", pt.control * anchor}});
  }
  return ref;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<unsigned> threads;
  bool resume = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream f(a.config);
  require(static_cast<bool>(f), ErrorKind::invalid_parameter, "cannot read config file");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::invalid_parameter, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  if (!a.out.empty()) c.output = a.out;
  c.threads = resolve_threads(a.threads ? a.threads : std::optional<unsigned>(c.threads));
  err << "config: " << config_to_json(c).dump() << '\n';

  if (c.output.empty()) {
    const auto result = run_experiment(c);
    write_csv(out, c, result.rows);
    if (!result.complete()) {
      err << "error: " << result.error.value_or("incomplete") << '\n';
      return kPartial;
    }
    return kOk;
  }
  RunFiles files{c.output, c.output + ".cursor.json"};
  std::vector<RiskEstimate> rows;
  ExperimentResult result;
  const int code = run_with_cursor(c, files, a.resume, err, rows, result);
  if (code != kOk) return code;
  double anchor = 0.0;
  json meta{{"config", config_to_json(c)}, {"minimax_reference", reference_json(result, rows, anchor)}};
  meta["minimax_anchor"] = anchor;
  std::ofstream(c.output + ".meta.json") << meta.dump(2) << '\n';
  out << "wrote " << rows.size() << " rows to " << c.output << '\n';
  return kOk;
}

struct ReproduceArgs {
  std::string figure = "2a";
  std::size_t max_d = 10000;
  std::size_t grid_points = 20;
  bool full = false;
  bool stepped = false;
  std::size_t reps = 100;
  std::uint64_t seed = 20240101;
  std::string out;
  std::optional<unsigned> threads;
  std::string sparsity_rule = "order";
  std::string threshold_rule = "with_e";
  bool resume = false;
};

json plot_spec(const std::string& csv_name, const json& reference, const std::string& title) {
  json data_layer{{"data", {{"url", csv_name}, {"format", {{"type", "csv"}}}}},
                  {"mark", {{"type", "line"}, {"point", true}}},
                  {"encoding",
                   {{"x", {{"field", "d"}, {"type", "quantitative"}, {"scale", {{"type", "log"}}}}},
                    {"y", {{"field", "mse_mean"}, {"type", "quantitative"}, {"scale", {{"type", "log"}}}}},
                    {"color", {{"field", "estimator"}, {"type", "nominal"}}}}}};
  json ref_layer{{"data", {{"values", reference}}},
                 {"mark", {{"type", "line"}, {"strokeDash", {4, 4}}, {"color", "black"}}},
                 {"encoding",
                  {{"x", {{"field", "d"}, {"type", "quantitative"}, {"scale", {{"type", "log"}}}}},
                   {"y", {{"field", "anchored"}, {"type", "quantitative"}, {"scale", {{"type", "log"}}}}}}}};
  return {{"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
          {"title", title},
          {"layer", {data_layer, ref_layer}}};
}

int cmd_reproduce(const ReproduceArgs& a, std::ostream& out, std::ostream& err) {
  require(a.figure == "2a" || a.figure == "2b", ErrorKind::invalid_parameter, "--figure must be 2a or 2b");
  ExperimentConfig c = ExperimentConfig::for_regime(a.figure == "2a" ? Regime::fig2a : Regime::fig2b);
  c.max_d = a.full ? 100000 : a.max_d;
  require(c.max_d >= 100, ErrorKind::invalid_parameter, "--max-d must be >= 100");
  c.grid_points = a.grid_points;
  c.grid = a.stepped ? GridKind::stepped : GridKind::log_uniform;
  if (a.stepped && a.full) c.grid_points = 40;
  c.reps = a.reps;
  c.seed = a.seed;
  c.threads = resolve_threads(a.threads);
  require(a.sparsity_rule == "order" || a.sparsity_rule == "lemma", ErrorKind::invalid_parameter,
          "--sparsity-rule must be order or lemma");
  c.sparsity_rule = a.sparsity_rule == "order" ? SparsityRule::order : SparsityRule::lemma;
  require(a.threshold_rule == "with_e" || a.threshold_rule == "plain", ErrorKind::invalid_parameter,
          "--threshold-rule must be with_e or plain");
  c.threshold_rule = a.threshold_rule == "with_e" ? ThresholdRule::with_e : ThresholdRule::plain;
  c.validate();

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::invalid_parameter, "cannot create output directory");
  c.output = (dir / (c.experiment_id + ".csv")).string();
  err << "config: " << config_to_json(c).dump() << '\n';

  std::vector<RiskEstimate> rows;
  ExperimentResult result;
  const int code = run_with_cursor(c, {c.output, dir / (c.experiment_id + ".cursor.json")}, a.resume, err, rows, result);
  if (code != kOk) return code;

  double anchor = 0.0;
  const json reference = reference_json(result, rows, anchor);
  json slopes = json::object(), finals = json::object();
  std::map<EstimatorKind, double> last;
  for (auto kind : c.estimators) {
    const auto s = series(rows, kind);
    const std::string name(to_string(kind));
    if (s.size() >= 2) slopes[name] = fit_log_slope(s);
    if (!s.empty()) {
      finals[name] = s.back().second;
      last[kind] = s.back().second;
    }
  }
  json summary{{"experiment_id", c.experiment_id},
               {"figure", a.figure},
               {"p", c.p},
               {"max_d", c.max_d},
               {"reps", c.reps},
               {"seed", c.seed},
               {"slopes", slopes},
               {"final_mse", finals},
               {"minimax_anchor", anchor},
               {"minimax_reference", reference},
               {"config", config_to_json(c)}};
  if (last.count(EstimatorKind::mle) && last.count(EstimatorKind::soft_threshold)) {
    summary["final_ratio_mle_over_st"] = last[EstimatorKind::mle] / last[EstimatorKind::soft_threshold];
  }
  std::ofstream(dir / (c.experiment_id + "_slopes.json")) << summary.dump(2) << '\n';
  std::ofstream(dir / (c.experiment_id + "_plot.json"))
      << plot_spec(c.experiment_id + ".csv", reference, "MSE against dimension (" + c.experiment_id + ")").dump(2)
      << '\n';

  for (auto& [name, v] : slopes.items()) {
    out << name << " slope " << format_real(v.get<double>()) << " final_mse " << format_real(finals[name].get<double>())
        << '\n';
  }
  if (summary.contains("final_ratio_mle_over_st")) {
    out << "final ratio mle/st " << format_real(summary["final_ratio_mle_over_st"].get<double>()) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 7;
  std::size_t reps = 10000;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  err << "config: " << json{{"suite", a.suite}, {"seed", a.seed}, {"reps", a.reps}}.dump() << '\n';
  const auto reports = verify_suite(a.suite, a.seed, a.reps);
  bool ok = true;
  for (const auto& r : reports) {
    out << format_report(r) << '\n';
    ok = ok && r.pass;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection estimators over l_p balls in the Gaussian sequence model"};
  app.name("lpseq");
  app.require_subcommand(1);

  ProjectArgs pa;
  auto* project_cmd = app.add_subcommand("project", "Euclidean projection onto r * B_p or the s-sparse set");
  project_cmd->add_option("--p", pa.p, "norm index in [0, inf]; 'inf' accepted")->required();
  project_cmd->add_option("--radius", pa.radius, "ball radius (p > 0)");
  project_cmd->add_option("--sparsity", pa.sparsity, "sparsity level (p = 0)");
  project_cmd->add_option("--input", pa.input, "file path, or an inline comma-separated list")->required();
  project_cmd->add_option("--tol", pa.tol, "dual tolerance; residuals above 10 * tol fail");
  project_cmd->add_option("--format", pa.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  RatesArgs ra;
  auto* rates_cmd = app.add_subcommand("rates", "Minimax control function, bounds and regime label");
  rates_cmd->add_option("--p", ra.p, "norm index in [0, inf]");
  rates_cmd->add_option("--d", ra.d, "dimension");
  rates_cmd->add_option("--sigma", ra.sigma, "noise level");
  rates_cmd->add_option("--radius", ra.radius, "ball radius");
  rates_cmd->add_option("--sparsity", ra.sparsity, "sparsity level (p = 0)");
  rates_cmd->add_option("--n", ra.n, "number of samples");
  rates_cmd->add_option("--tau", ra.tau, "per-sample noise; sigma = tau / sqrt(n)");
  rates_cmd->add_option("--scenario", ra.scenario, "log_subopt or poly_subopt: predicted scalings at --n")
      ->check(CLI::IsMember({"log_subopt", "poly_subopt"}));
  rates_cmd->add_option("--delta", ra.delta, "scenario exponent, p = 1 + delta");
  rates_cmd->add_option("--format", ra.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  SimulateArgs sa;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run an experiment described by a JSON config");
  simulate_cmd->add_option("--config", sa.config, "JSON config path")->required();
  simulate_cmd->add_option("--out", sa.out, "CSV output path (default: config output, else stdout)");
  simulate_cmd->add_option("--threads", sa.threads, "worker threads (LPSEQ_THREADS overrides)");
  simulate_cmd->add_flag("--resume", sa.resume, "continue from the cursor file of a partial run");

  ReproduceArgs xa;
  auto* reproduce_cmd = app.add_subcommand("reproduce", "Dimension sweep for the spike or flat regime");
  reproduce_cmd->add_option("--figure", xa.figure, "2a (spike) or 2b (flat)")->required();
  reproduce_cmd->add_option("--max-d", xa.max_d, "largest dimension");
  reproduce_cmd->add_option("--grid-points", xa.grid_points, "number of grid dimensions");
  reproduce_cmd->add_flag("--full", xa.full, "grid up to d = 100000");
  reproduce_cmd->add_flag("--stepped", xa.stepped, "use floor(10^(2 + 8k/39)) instead of a log-uniform grid");
  reproduce_cmd->add_option("--reps", xa.reps, "replications per cell");
  reproduce_cmd->add_option("--seed", xa.seed, "64-bit seed");
  reproduce_cmd->add_option("--out", xa.out, "output directory")->required();
  reproduce_cmd->add_option("--threads", xa.threads, "worker threads (LPSEQ_THREADS overrides)");
  reproduce_cmd->add_option("--sparsity-rule", xa.sparsity_rule, "flat support size: order or lemma");
  reproduce_cmd->add_option("--threshold-rule", xa.threshold_rule, "soft threshold level: with_e or plain");
  reproduce_cmd->add_flag("--resume", xa.resume, "continue from the cursor file of a partial run");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run oracle and probability checks");
  verify_cmd->add_option("--suite", va.suite, "all|kkt|oracle|monotone|widths|smallball|noiseterm|variance")
      ->check(CLI::IsMember({"all", "kkt", "oracle", "monotone", "widths", "smallball", "noiseterm", "variance"}));
  verify_cmd->add_option("--seed", va.seed, "64-bit seed");
  verify_cmd->add_option("--reps", va.reps, "replications for probability checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*project_cmd) return cmd_project(pa, out, err);
    if (*rates_cmd) return cmd_rates(ra, out, err);
    if (*simulate_cmd) return cmd_simulate(sa, out, err);
    if (*reproduce_cmd) return cmd_reproduce(xa, out, err);
    if (*verify_cmd) return cmd_verify(va, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace lpseq::cli
