#pragma once

// Monte Carlo risk of the estimators in the Gaussian sequence model and the
// dimension-sweep experiment runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpseq/errors.hpp"
#include "lpseq/estimators.hpp"
#include "lpseq/hard_instances.hpp"
#include "lpseq/rates.hpp"
#include "lpseq/rng.hpp"

namespace lpseq {

/// theta + sigma * xi with xi drawn from the stream for `key`.
inline Vector sample_observation(std::span<const double> theta, double sigma, const TrialKey& key) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_parameter, "sigma must be > 0");
  Vector y = standard_normal(key, theta.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = theta[i] + sigma * y[i];
  return y;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any worker is rethrown after all workers stop.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// LPSEQ_THREADS when set to a positive integer, otherwise `requested`, otherwise
/// the hardware concurrency.
inline unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt) {
  if (const char* env = std::getenv("LPSEQ_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  if (requested && *requested > 0) return *requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RiskEstimate {
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  std::size_t reps = 0;
  std::size_t d = 0;
  double sigma = 0.0;
  double p = 0.0;
  EstimatorKind estimator = EstimatorKind::mle;
  std::uint64_t seed = 0;
};

/// Mean and standard error (sample standard deviation / sqrt(n)); the error is 0 for n = 1.
inline std::pair<double, double> mean_and_stderr(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Squared losses ||theta_hat(Y) - theta||^2, indexed [estimator][trial]. All
/// estimators see the same draw within a trial.
inline std::vector<Vector> trial_losses(const std::vector<EstimatorSpec>& specs, std::span<const double> theta,
                                        double sigma, std::size_t reps, std::uint64_t seed, std::uint64_t cell,
                                        unsigned threads = 1) {
  require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
  std::vector<Vector> losses(specs.size(), Vector(reps, 0.0));
  parallel_for(reps, threads, [&](std::size_t t) {
    const Vector y = sample_observation(theta, sigma, {seed, cell, t, 0});
    for (std::size_t e = 0; e < specs.size(); ++e) {
      losses[e][t] = squared_distance(estimate(specs[e], y), theta);
    }
  });
  return losses;
}

inline RiskEstimate summarize(const EstimatorSpec& spec, std::span<const double> losses, std::size_t d,
                              double sigma, std::uint64_t seed) {
  RiskEstimate r;
  std::tie(r.mse_mean, r.mse_stderr) = mean_and_stderr(losses);
  r.reps = losses.size();
  r.d = d;
  r.sigma = sigma;
  r.p = spec.kind == EstimatorKind::mle || spec.kind == EstimatorKind::soft_threshold ? spec.ball.p : 0.0;
  r.estimator = spec.kind;
  r.seed = seed;
  return r;
}

inline RiskEstimate estimate_risk(const EstimatorSpec& spec, std::span<const double> theta, double sigma,
                                  std::size_t reps, std::uint64_t seed, std::uint64_t cell = 0,
                                  unsigned threads = 1) {
  const auto losses = trial_losses({spec}, theta, sigma, reps, seed, cell, threads);
  return summarize(spec, losses[0], theta.size(), sigma, seed);
}

/// Ordinary least-squares slope of log(mse) against log(d).
inline double fit_log_slope(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 2, ErrorKind::degenerate_input, "slope fit needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (auto [d, v] : points) {
    require(d > 0.0 && v > 0.0, ErrorKind::degenerate_input, "slope fit needs positive values");
    sx += std::log(d);
    sy += std::log(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (auto [d, v] : points) {
    const double dx = std::log(d) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  require(sxx > 0.0, ErrorKind::degenerate_input, "slope fit needs at least two distinct dimensions");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class Regime { fig2a, fig2b, custom };
enum class SigmaRule { spike, flat, explicit_list };
enum class InstanceKind { spike, flat, zero };
enum class GridKind { log_uniform, stepped };

constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::fig2a: return "fig2a";
    case Regime::fig2b: return "fig2b";
    case Regime::custom: return "custom";
  }
  return "unknown";
}

/// floor of `points` log-uniform values from lo to hi, duplicates removed.
inline std::vector<std::size_t> log_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  require(lo >= 1 && hi >= lo, ErrorKind::invalid_parameter, "grid needs 1 <= lo <= hi");
  require(points >= 1, ErrorKind::invalid_parameter, "grid needs at least one point");
  std::vector<std::size_t> g;
  const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
  for (std::size_t k = 0; k < points; ++k) {
    const double t = points == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    auto v = static_cast<std::size_t>(std::floor(std::exp(a + t * (b - a)) + 1e-9));
    if (k + 1 == points) v = hi;
    if (g.empty() || v > g.back()) g.push_back(v);
  }
  return g;
}

/// floor(10^(2 + 8k/39)) for k = 0..points-1, truncated at max_d.
inline std::vector<std::size_t> stepped_grid(std::size_t points, std::size_t max_d) {
  std::vector<std::size_t> g;
  for (std::size_t k = 0; k < points; ++k) {
    const auto v = static_cast<std::size_t>(std::floor(std::pow(10.0, 2.0 + 8.0 * static_cast<double>(k) / 39.0) + 1e-9));
    if (v > max_d) break;
    if (g.empty() || v > g.back()) g.push_back(v);
  }
  return g;
}

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  Regime regime = Regime::custom;
  double p = 1.5;
  double radius = 1.0;
  std::vector<std::size_t> d_grid;
  std::size_t max_d = 10000;
  std::size_t grid_points = 20;
  GridKind grid = GridKind::log_uniform;
  SigmaRule sigma_rule = SigmaRule::spike;
  std::vector<double> sigmas;  // explicit_list: one per grid entry, or a single shared value
  InstanceKind instance = InstanceKind::spike;
  SparsityRule sparsity_rule = SparsityRule::order;
  std::size_t reps = 100;
  std::vector<EstimatorKind> estimators{EstimatorKind::mle, EstimatorKind::soft_threshold};
  ThresholdRule threshold_rule = ThresholdRule::with_e;
  std::uint64_t seed = 20240101;
  std::string output;
  unsigned threads = 1;

  /// The settings the two named regimes fix.
  static ExperimentConfig for_regime(Regime r) {
    ExperimentConfig c;
    c.regime = r;
    c.experiment_id = std::string(to_string(r));
    c.p = 1.5;
    if (r == Regime::fig2b) {
      c.sigma_rule = SigmaRule::flat;
      c.instance = InstanceKind::flat;
    }
    return c;
  }

  std::vector<std::size_t> resolved_grid() const {
    if (!d_grid.empty()) return d_grid;
    return grid == GridKind::stepped ? stepped_grid(grid_points, max_d) : log_grid(100, max_d, grid_points);
  }

  double sigma_at(std::size_t index, std::size_t d) const {
    const double dd = static_cast<double>(d);
    switch (sigma_rule) {
      case SigmaRule::spike: return std::pow(dd, 1.0 / p - 1.0);
      case SigmaRule::flat: return 1.0 / std::sqrt(dd);
      case SigmaRule::explicit_list: return sigmas.size() == 1 ? sigmas[0] : sigmas.at(index);
    }
    return 1.0;
  }

  void validate() const {
    require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
    require(!estimators.empty(), ErrorKind::invalid_parameter, "at least one estimator is required");
    require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_parameter, "radius must be > 0");
    require(p > 0.0, ErrorKind::invalid_parameter, "experiments need p > 0");
    const auto g = resolved_grid();
    require(!g.empty(), ErrorKind::invalid_parameter, "dimension grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
      require(g[i] >= 1, ErrorKind::invalid_parameter, "dimensions must be >= 1");
      if (i > 0) require(g[i] > g[i - 1], ErrorKind::invalid_parameter, "dimension grid must be strictly increasing");
    }
    if (sigma_rule == SigmaRule::explicit_list) {
      require(sigmas.size() == 1 || sigmas.size() == g.size(), ErrorKind::invalid_parameter,
              "explicit sigmas need one value or one per dimension");
      for (double s : sigmas) require(std::isfinite(s) && s > 0.0, ErrorKind::invalid_parameter, "sigma must be > 0");
    }
    if (sigma_rule == SigmaRule::spike) {
      require(std::isfinite(p), ErrorKind::invalid_parameter, "spike sigma rule needs finite p");
    }
    if (instance == InstanceKind::flat) {
      require(p > 1.0 && p < 2.0, ErrorKind::invalid_parameter, "flat instance needs p in (1, 2)");
      require(g.front() >= 4, ErrorKind::invalid_parameter, "flat instance needs d >= 4");
    }
    for (auto e : estimators) {
      if (e == EstimatorKind::soft_threshold) {
        require(p < 2.0, ErrorKind::invalid_parameter, "soft thresholding rule needs p in (0, 2)");
      }
    }
  }
};

namespace detail {

template <typename Enum>
Enum enum_from(const nlohmann::json& j, const char* field,
               std::initializer_list<std::pair<const char*, Enum>> names) {
  require(j.is_string(), ErrorKind::invalid_parameter, (std::string(field) + " must be a string").c_str());
  const auto s = j.get<std::string>();
  for (auto [n, v] : names)
    if (s == n) return v;
  throw Error(ErrorKind::invalid_parameter, "unknown value '" + s + "' for " + field);
}

inline double p_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInf;
  require(j.is_number(), ErrorKind::invalid_parameter, "p must be a number or \"inf\"");
  return j.get<double>();
}

}  // namespace detail

/// Builds a config from a JSON object whose keys mirror the ExperimentConfig
/// fields. Unknown keys are rejected. A `regime` key selects that regime's
/// defaults before the remaining keys are applied.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::invalid_parameter, "config must be a JSON object");
  static const std::set<std::string> known{
      "experiment_id", "regime", "p", "radius", "d_grid", "max_d", "grid_points", "grid", "sigma_rule",
      "sigmas", "instance", "sparsity_rule", "reps", "estimators", "threshold_rule", "seed", "output", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    require(known.count(it.key()) == 1, ErrorKind::invalid_parameter, ("unknown config key '" + it.key() + "'").c_str());
  }
  ExperimentConfig c;
  try {
    if (j.contains("regime")) {
      c = ExperimentConfig::for_regime(detail::enum_from<Regime>(
          j["regime"], "regime", {{"fig2a", Regime::fig2a}, {"fig2b", Regime::fig2b}, {"custom", Regime::custom}}));
    }
    if (j.contains("experiment_id")) c.experiment_id = j["experiment_id"].get<std::string>();
    if (j.contains("p")) c.p = detail::p_from_json(j["p"]);
    if (j.contains("radius")) c.radius = j["radius"].get<double>();
    if (j.contains("d_grid")) c.d_grid = j["d_grid"].get<std::vector<std::size_t>>();
    if (j.contains("max_d")) c.max_d = j["max_d"].get<std::size_t>();
    if (j.contains("grid_points")) c.grid_points = j["grid_points"].get<std::size_t>();
    if (j.contains("grid")) {
      c.grid = detail::enum_from<GridKind>(j["grid"], "grid",
                                           {{"log_uniform", GridKind::log_uniform}, {"stepped", GridKind::stepped}});
    }
    if (j.contains("sigma_rule")) {
      c.sigma_rule = detail::enum_from<SigmaRule>(
          j["sigma_rule"], "sigma_rule",
          {{"spike", SigmaRule::spike}, {"flat", SigmaRule::flat}, {"explicit", SigmaRule::explicit_list}});
    }
    if (j.contains("sigmas")) c.sigmas = j["sigmas"].get<std::vector<double>>();
    if (j.contains("instance")) {
      c.instance = detail::enum_from<InstanceKind>(
          j["instance"], "instance",
          {{"spike", InstanceKind::spike}, {"flat", InstanceKind::flat}, {"zero", InstanceKind::zero}});
    }
    if (j.contains("sparsity_rule")) {
      c.sparsity_rule = detail::enum_from<SparsityRule>(j["sparsity_rule"], "sparsity_rule",
                                                        {{"order", SparsityRule::order}, {"lemma", SparsityRule::lemma}});
    }
    if (j.contains("reps")) c.reps = j["reps"].get<std::size_t>();
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& e : j["estimators"]) c.estimators.push_back(parse_estimator_kind(e.get<std::string>()));
    }
    if (j.contains("threshold_rule")) {
      c.threshold_rule = detail::enum_from<ThresholdRule>(
          j["threshold_rule"], "threshold_rule", {{"with_e", ThresholdRule::with_e}, {"plain", ThresholdRule::plain}});
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_parameter, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment_id"] = c.experiment_id;
  j["regime"] = std::string(to_string(c.regime));
  j["p"] = std::isinf(c.p) ? nlohmann::json("inf") : nlohmann::json(c.p);
  j["radius"] = c.radius;
  j["d_grid"] = c.resolved_grid();
  j["sigma_rule"] = c.sigma_rule == SigmaRule::spike ? "spike" : c.sigma_rule == SigmaRule::flat ? "flat" : "explicit";
  if (!c.sigmas.empty()) j["sigmas"] = c.sigmas;
  j["instance"] = c.instance == InstanceKind::spike ? "spike" : c.instance == InstanceKind::flat ? "flat" : "zero";
  j["sparsity_rule"] = c.sparsity_rule == SparsityRule::order ? "order" : "lemma";
  j["reps"] = c.reps;
  auto& est = j["estimators"] = nlohmann::json::array();
  for (auto e : c.estimators) est.push_back(std::string(to_string(e)));
  j["threshold_rule"] = c.threshold_rule == ThresholdRule::with_e ? "with_e" : "plain";
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["threads"] = c.threads;
  return j;
}

// ---------------------------------------------------------------------------
// Experiment runner

struct CellSetup {
  std::size_t d = 0;
  double sigma = 0.0;
  Vector theta;
  std::size_t support = 1;
  bool clamped = false;
};

inline CellSetup make_cell(const ExperimentConfig& c, std::size_t index, std::size_t d) {
  CellSetup cell;
  cell.d = d;
  cell.sigma = c.sigma_at(index, d);
  switch (c.instance) {
    case InstanceKind::spike:
      cell.theta = spike_instance(d);
      break;
    case InstanceKind::zero:
      cell.theta.assign(d, 0.0);
      cell.support = 0;
      break;
    case InstanceKind::flat: {
      if (c.sparsity_rule == SparsityRule::lemma) {
        auto h = flat_sparse_instance(cell.sigma, c.p, d);
        cell.support = h.k;
        cell.clamped = h.clamped;
        cell.theta = std::move(h.theta_star);
      } else {
        const std::size_t k = sparsity_scaling(cell.sigma, c.p, d);
        cell.support = std::clamp<std::size_t>(k, 1, d / 2);
        cell.clamped = cell.support != k;
        cell.theta = flat_instance(d, cell.support, c.p);
      }
      break;
    }
  }
  for (double& v : cell.theta) v *= c.radius;
  return cell;
}

struct ReferencePoint {
  std::size_t d = 0;
  double sigma = 0.0;
  double control = 0.0;
  double anchored = 0.0;  // control * anchor
};

struct ExperimentResult {
  std::vector<RiskEstimate> rows;
  std::vector<ReferencePoint> reference;
  double anchor = 0.0;             // first MLE mse over first control value; 0 when no MLE row
  std::size_t next_cell = 0;       // resume cursor into the dimension grid
  std::size_t total_cells = 0;
  std::optional<std::string> error;

  bool complete() const { return !error && next_cell == total_cells; }
};

inline EstimatorSpec spec_for(const ExperimentConfig& c, EstimatorKind kind, std::size_t d, double sigma) {
  EstimatorSpec s;
  s.kind = kind;
  s.ball = LpBall::norm_ball(c.p, c.radius, d);
  s.sigma = sigma;
  s.rule = c.threshold_rule;
  return s;
}

/// Runs grid cells [start_cell, end) in order. Each cell's draws are keyed by
/// (seed, d, trial), so a resumed run reproduces an uninterrupted one. A solver
/// error stops the run and leaves the cursor at the failing cell.
inline ExperimentResult run_experiment(const ExperimentConfig& c, std::size_t start_cell = 0,
                                       const std::function<void(const RiskEstimate&)>& on_row = {}) {
  c.validate();
  const auto grid = c.resolved_grid();
  ExperimentResult out;
  out.total_cells = grid.size();
  out.next_cell = start_cell;
  for (std::size_t i = start_cell; i < grid.size(); ++i) {
    try {
      const CellSetup cell = make_cell(c, i, grid[i]);
      std::vector<EstimatorSpec> specs;
      for (auto k : c.estimators) specs.push_back(spec_for(c, k, cell.d, cell.sigma));
      const auto losses = trial_losses(specs, cell.theta, cell.sigma, c.reps, c.seed, cell.d, c.threads);
      for (std::size_t e = 0; e < specs.size(); ++e) {
        RiskEstimate r = summarize(specs[e], losses[e], cell.d, cell.sigma, c.seed);
        r.p = c.p;
        out.rows.push_back(r);
        if (on_row) on_row(r);
      }
    } catch (const std::exception& ex) {
      out.error = "cell d=" + std::to_string(grid[i]) + ": " + ex.what();
      break;
    }
    out.next_cell = i + 1;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RateQuery q;
    q.p = c.p;
    q.d = static_cast<double>(grid[i]);
    q.sigma = c.sigma_at(i, grid[i]);
    q.radius = c.radius;
    out.reference.push_back({grid[i], q.sigma, control_function(q), 0.0});
  }
  for (const auto& r : out.rows) {
    if (r.estimator == EstimatorKind::mle && r.d == grid[start_cell]) {
      out.anchor = r.mse_mean / out.reference[start_cell].control;
      break;
    }
  }
  for (auto& ref : out.reference) ref.anchored = ref.control * out.anchor;
  return out;
}

/// (d, mse) pairs of one estimator, for slope fits.
inline std::vector<std::pair<double, double>> series(const std::vector<RiskEstimate>& rows, EstimatorKind kind) {
  std::vector<std::pair<double, double>> s;
  for (const auto& r : rows)
    if (r.estimator == kind) s.emplace_back(static_cast<double>(r.d), r.mse_mean);
  return s;
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr const char* kCsvHeader = "experiment_id,regime,p,d,sigma,estimator,reps,mse_mean,mse_stderr,seed";

inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_row(std::ostream& os, const ExperimentConfig& c, const RiskEstimate& r) {
  os << c.experiment_id << ',' << to_string(c.regime) << ',' << format_real(r.p) << ',' << r.d << ','
     << format_real(r.sigma) << ',' << to_string(r.estimator) << ',' << r.reps << ',' << format_real(r.mse_mean)
     << ',' << format_real(r.mse_stderr) << ',' << r.seed << '\n';
}

inline void write_csv(std::ostream& os, const ExperimentConfig& c, const std::vector<RiskEstimate>& rows,
                      bool header = true) {
  if (header) os << kCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(os, c, r);
}

/// Parses rows written by write_csv. The header line is skipped.
inline std::vector<RiskEstimate> read_csv_rows(std::istream& is) {
  std::vector<RiskEstimate> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == kCsvHeader) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    require(f.size() == 10, ErrorKind::invalid_parameter, "malformed results row");
    RiskEstimate r;
    r.p = f[2] == "inf" ? kInf : std::stod(f[2]);
    r.d = std::stoull(f[3]);
    r.sigma = std::stod(f[4]);
    r.estimator = parse_estimator_kind(f[5]);
    r.reps = std::stoull(f[6]);
    r.mse_mean = std::stod(f[7]);
    r.mse_stderr = std::stod(f[8]);
    r.seed = std::stoull(f[9]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lpseq
