#pragma once

// Independent oracles and empirical probability checks used by the test suite
// and the `verify` command.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lpseq/errors.hpp"
#include "lpseq/hard_instances.hpp"
#include "lpseq/lp_ball.hpp"
#include "lpseq/lp_projection.hpp"
#include "lpseq/rates.hpp"
#include "lpseq/rng.hpp"
#include "lpseq/simulation.hpp"

namespace lpseq {

struct CheckReport {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  bool upper = false;  // pass means statistic <= threshold (else >=)
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool inconclusive = false;
  std::string note;
};

inline CheckReport make_report(std::string name, double statistic, double threshold, bool upper,
                               std::size_t trials, std::uint64_t seed) {
  CheckReport r{std::move(name), false, statistic, threshold, upper, trials, seed, false, {}};
  r.pass = upper ? statistic <= threshold : statistic >= threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Brute-force projection for d <= 3

namespace detail {

using Objective2 = std::function<double(double, double)>;

/// Minimizes f over the points of [lo, hi]^2 where f is finite: a grid with
/// `n` points per side, then repeated 21 x 21 zooms around the best few cells.
inline std::pair<double, double> grid_min_2d(const Objective2& f, int n, double tol) {
  struct Cand {
    double v, x, y;
  };
  std::vector<Cand> cands;
  const double h0 = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = i * h0, y = j * h0;
      const double v = f(x, y);
      if (std::isfinite(v)) cands.push_back({v, x, y});
    }
  }
  if (cands.empty()) return {0.0, 0.0};
  const std::size_t keep = std::min<std::size_t>(6, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    [](const Cand& a, const Cand& b) { return a.v < b.v; });
  Cand best = cands.front();
  for (std::size_t c = 0; c < keep; ++c) {
    Cand cur = cands[c];
    for (double h = h0; h > tol; h /= 5.0) {
      Cand next = cur;
      for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
          const double x = std::clamp(cur.x + i * h / 5.0, 0.0, 1.0);
          const double y = std::clamp(cur.y + j * h / 5.0, 0.0, 1.0);
          const double v = f(x, y);
          if (std::isfinite(v) && v < next.v) next = {v, x, y};
        }
      }
      cur = next;
    }
    if (cur.v < best.v) best = cur;
  }
  return {best.x, best.y};
}

inline double grid_min_1d(const std::function<double(double)>& f, int n, double tol) {
  struct Cand {
    double v, x;
  };
  std::vector<Cand> cands;
  const double h0 = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double v = f(i * h0);
    if (std::isfinite(v)) cands.push_back({v, i * h0});
  }
  if (cands.empty()) return 0.0;
  const std::size_t keep = std::min<std::size_t>(6, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    [](const Cand& a, const Cand& b) { return a.v < b.v; });
  Cand best = cands.front();
  for (std::size_t c = 0; c < keep; ++c) {
    Cand cur = cands[c];
    for (double h = h0; h > tol; h /= 10.0) {
      Cand next = cur;
      for (int i = -20; i <= 20; ++i) {
        const double x = std::clamp(cur.x + i * h / 10.0, 0.0, 1.0);
        const double v = f(x);
        if (std::isfinite(v) && v < next.v) next = {v, x};
      }
      cur = next;
    }
    if (cur.v < best.v) best = cur;
  }
  return best.x;
}

}  // namespace detail

/// Grid-search projection onto a ball of dimension at most 3.
///
/// Works on |y| / r in the nonnegative orthant. For 0 < p < inf and y outside
/// the ball the minimizer lies on the sphere ||x||_p = 1, so every face (each
/// nonempty support) of the sphere is searched through an explicit
/// parametrization, starting from a grid of spacing `resolution` and refined
/// by zooming. p = inf is separable and p = 0 enumerates supports.
inline Vector brute_force_projection(const LpBall& ball, std::span<const double> y, double resolution = 1e-3) {
  detail::check_input(ball, y);
  require(ball.dim <= 3, ErrorKind::dimension_too_large, "brute-force projection supports d <= 3");
  require(resolution > 0.0 && resolution < 1.0, ErrorKind::invalid_parameter, "resolution must lie in (0, 1)");
  const std::size_t d = y.size();
  if (ball.is_sparse()) {
    Vector best(d, 0.0);
    double best_val = kInf;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) > ball.sparsity) continue;
      Vector x(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        if (mask & (1u << i)) x[i] = y[i];
      const double v = squared_distance(x, y);
      if (v < best_val) {
        best_val = v;
        best = x;
      }
    }
    return best;
  }
  if (ball.contains(y, 0.0)) return Vector(y.begin(), y.end());

  const double r = ball.radius, p = ball.p;
  const Vector a = detail::magnitudes(y, r);
  const int n = static_cast<int>(std::ceil(1.0 / resolution)) + 1;
  const double tol = 1e-13;
  Vector mag(d, 0.0);

  if (ball.is_box()) {
    for (std::size_t i = 0; i < d; ++i) {
      mag[i] = detail::grid_min_1d([&](double t) { return (t - a[i]) * (t - a[i]); }, n, tol);
    }
  } else {
    auto rest = [p](double used) { return used >= 1.0 ? 0.0 : std::pow(1.0 - used, 1.0 / p); };
    double best_val = kInf;
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < d; ++i)
        if (mask & (1u << i)) s.push_back(i);
      // The largest target is solved for last, where the sphere is least steep.
      std::stable_sort(s.begin(), s.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
      Vector x(d, 0.0);
      if (s.size() == 1) {
        x[s[0]] = 1.0;
      } else if (s.size() == 2) {
        auto f = [&](double t) {
          const double u = rest(std::pow(t, p));
          return (t - a[s[0]]) * (t - a[s[0]]) + (u - a[s[1]]) * (u - a[s[1]]);
        };
        const double t = detail::grid_min_1d(f, n, tol);
        x[s[0]] = t;
        x[s[1]] = rest(std::pow(t, p));
      } else {
        auto f = [&](double t1, double t2) {
          const double used = std::pow(t1, p) + std::pow(t2, p);
          if (used > 1.0) return kInf;
          const double u = rest(used);
          return (t1 - a[s[0]]) * (t1 - a[s[0]]) + (t2 - a[s[1]]) * (t2 - a[s[1]]) + (u - a[s[2]]) * (u - a[s[2]]);
        };
        const auto [t1, t2] = detail::grid_min_2d(f, std::min(n, 401), tol);
        x[s[0]] = t1;
        x[s[1]] = t2;
        x[s[2]] = rest(std::pow(t1, p) + std::pow(t2, p));
      }
      const double v = squared_distance(x, a);
      if (v < best_val) {
        best_val = v;
        mag = x;
      }
    }
  }
  Vector out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = sign_of(y[i]) * mag[i] * r;
  return out;
}

// ---------------------------------------------------------------------------
// Widths

/// Sum of the s largest squared entries of xi.
inline double top_s_energy(Vector xi, std::size_t s) {
  Vector& sq = xi;
  for (double& v : sq) v *= v;
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(s - 1), sq.end(), std::greater<>());
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) total += sq[i];
  return total;
}

/// Monte Carlo mean and standard error of max_{|S| <= s} ||xi_S||^2.
inline std::pair<double, double> sparse_cap_width(std::size_t d, std::size_t s, std::size_t reps, std::uint64_t seed) {
  require(s >= 1 && s <= d, ErrorKind::invalid_parameter, "need 1 <= s <= d");
  require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
  Vector vals(reps);
  for (std::size_t t = 0; t < reps; ++t) vals[t] = top_s_energy(standard_normal({seed, d * 1000 + s, t, 1}, d), s);
  return mean_and_stderr(vals);
}

/// 6 s log(e d / s).
inline double sparse_cap_bound(std::size_t d, std::size_t s) {
  return 6.0 * static_cast<double>(s) * std::log(M_E * static_cast<double>(d) / static_cast<double>(s));
}

/// Support size ceil(eps^{-2p/(2-p)}), at most d.
inline std::size_t witness_support(double p, double eps, std::size_t d) {
  const double s = std::ceil(std::pow(eps, -2.0 * p / (2.0 - p)) - 1e-9);
  return static_cast<std::size_t>(std::clamp(s, 1.0, static_cast<double>(d)));
}

struct PhiWitness {
  double value = 0.0;  // <x, xi>
  Vector x;
  std::size_t support = 0;
};

/// Lower bound on sup{<x, xi> : ||x||_p^p <= 2, ||x||_2 <= eps} from the
/// feasible point x = eps xi_S / ||xi_S||_2, S the top-s coordinates.
inline PhiWitness phi_lower_witness(std::span<const double> xi, double p, double eps) {
  require(p > 0.0 && p < 1.0, ErrorKind::invalid_parameter, "witness needs p in (0, 1)");
  require(!xi.empty(), ErrorKind::empty_input, "xi is empty");
  const std::size_t d = xi.size();
  const double eps_min = std::pow(static_cast<double>(d), -(2.0 - p) / (2.0 * p));
  require(std::isfinite(eps) && eps >= eps_min * (1.0 - 1e-12) && eps <= 1.0, ErrorKind::epsilon_out_of_range,
          "eps must lie in [d^{-(2-p)/(2p)}, 1]");
  PhiWitness w;
  w.support = witness_support(p, eps, d);
  w.x.assign(d, 0.0);
  const auto order = detail::order_by_magnitude(xi);
  double norm2 = 0.0;
  for (std::size_t j = 0; j < w.support; ++j) norm2 += xi[order[j]] * xi[order[j]];
  if (norm2 == 0.0) return w;
  const double scale = eps / std::sqrt(norm2);
  for (std::size_t j = 0; j < w.support; ++j) w.x[order[j]] = scale * xi[order[j]];
  require(lp_pow_sum(w.x, p) <= 2.0 * (1.0 + 1e-12), ErrorKind::degenerate_input, "witness violates the l_p budget");
  require(std::fabs(lp_norm(w.x, 2.0) - eps) <= 1e-12 * (1.0 + eps), ErrorKind::degenerate_input,
          "witness violates the l_2 budget");
  for (std::size_t i = 0; i < d; ++i) w.value += w.x[i] * xi[i];
  return w;
}

// ---------------------------------------------------------------------------
// Probability checks

inline double binomial_stderr(double prob, std::size_t n) {
  return std::sqrt(prob * (1.0 - prob) / static_cast<double>(n));
}

/// P{||xi||_r >= sqrt(r) D^{1/r} / sqrt(32 e)} >= 1/2 for xi ~ N(0, I_D).
inline CheckReport check_small_ball(std::size_t D, double r, std::size_t reps, std::uint64_t seed) {
  require(D >= 44, ErrorKind::invalid_parameter, "small-ball check needs D >= 44");
  require(r >= 2.0 && r <= 2.0 * std::log(static_cast<double>(D)), ErrorKind::invalid_parameter,
          "small-ball check needs r in [2, 2 log D]");
  require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
  const double level = std::sqrt(r) * std::pow(static_cast<double>(D), 1.0 / r) / std::sqrt(32.0 * M_E);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < reps; ++t) hits += lp_norm(standard_normal({seed, D, t, 2}, D), r) >= level;
  const double freq = static_cast<double>(hits) / static_cast<double>(reps);
  return make_report("small_ball(D=" + std::to_string(D) + ",r=" + format_real(r) + ")", freq,
                     0.5 - 3.0 * binomial_stderr(0.5, reps), false, reps, seed);
}

/// Mean of the m/4 smallest |xi_i|^q over the block i = m/2 .. m-1 (0-based),
/// with m = 4 floor(d/4).
inline double noise_term(std::span<const double> xi, double q) {
  const std::size_t m = xi.size() - xi.size() % 4;
  require(m >= 4, ErrorKind::invalid_parameter, "noise term needs d >= 4");
  Vector block;
  for (std::size_t i = m / 2; i < m; ++i) block.push_back(abs_pow(xi[i], q));
  std::sort(block.begin(), block.end());
  double s = 0.0;
  for (std::size_t i = 0; i < m / 4; ++i) s += block[i];
  return s * 4.0 / static_cast<double>(m);
}

/// P{T >= 1/2 (3t/10)^q} >= (1-t)^2 / 80 for the noise term T.
inline CheckReport check_noise_term(std::size_t d, double q, double t, std::size_t reps, std::uint64_t seed) {
  require(d >= 4, ErrorKind::invalid_parameter, "noise-term check needs d >= 4");
  require(q >= 2.0 && q <= 2.0 + std::log(static_cast<double>(d)), ErrorKind::invalid_parameter,
          "noise-term check needs q in [2, 2 + log d]");
  require(t > 0.0 && t < 1.0, ErrorKind::invalid_parameter, "noise-term check needs t in (0, 1)");
  require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
  const double level = 0.5 * std::pow(0.3 * t, q);
  const double bound = (1.0 - t) * (1.0 - t) / 80.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < reps; ++k) hits += noise_term(standard_normal({seed, d, k, 3}, d), q) >= level;
  const double freq = static_cast<double>(hits) / static_cast<double>(reps);
  return make_report("noise_term(d=" + std::to_string(d) + ",q=" + format_real(q) + ",t=" + format_real(t) + ")",
                     freq, bound - 3.0 * binomial_stderr(bound, reps), false, reps, seed);
}

inline constexpr double kDefaultVarianceSlack = 100.0;

/// Empirical E||Pi(Y) - E Pi(Y)||^2 divided by the control function, against `slack`.
inline CheckReport check_mle_variance(const LpBall& ball, std::span<const double> theta, double sigma,
                                      std::size_t reps, std::uint64_t seed, double slack = kDefaultVarianceSlack) {
  require(ball.p >= 1.0, ErrorKind::invalid_parameter, "variance check needs a convex ball (p >= 1)");
  require(reps >= 1, ErrorKind::invalid_parameter, "reps must be >= 1");
  const std::size_t d = theta.size();
  std::vector<Vector> fits(reps);
  for (std::size_t t = 0; t < reps; ++t) fits[t] = project(ball, sample_observation(theta, sigma, {seed, d, t, 4})).point;
  double variance = 0.0;
  if (reps >= 2) {
    for (std::size_t i = 0; i < d; ++i) {
      double mean = 0.0;
      for (const auto& f : fits) mean += f[i];
      mean /= static_cast<double>(reps);
      for (const auto& f : fits) variance += (f[i] - mean) * (f[i] - mean);
    }
    variance /= static_cast<double>(reps - 1);
  }
  RateQuery q;
  q.p = ball.p;
  q.d = static_cast<double>(d);
  q.sigma = sigma;
  q.radius = ball.radius;
  const double ratio = variance / control_function(q);
  auto rep = make_report("mle_variance(p=" + format_real(ball.p) + ",d=" + std::to_string(d) + ")", ratio, slack,
                         true, reps, seed);
  if (reps < 3) {
    rep.inconclusive = true;
    rep.pass = false;
    rep.note = "too few replications";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Suites

/// Per-draw comparison of ||Pi(theta + s xi) - theta|| at two noise levels s < v.
inline CheckReport check_monotonicity(double p, std::size_t d, std::size_t draws, std::uint64_t seed) {
  const LpBall ball = LpBall::norm_ball(p, 1.0, d);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    NormalStream rng({seed, d, t, 5});
    Vector theta = rng.draw(d);
    const double scale = rng.uniform();
    const double n = lp_norm(theta, p);
    for (double& v : theta) v *= scale / n;
    const Vector xi = rng.draw(d);
    const double s1 = std::exp(-3.0 + 4.0 * rng.uniform());
    const double s2 = s1 * (1.0 + 2.0 * rng.uniform());
    auto err = [&](double s) {
      Vector y(d);
      for (std::size_t i = 0; i < d; ++i) y[i] = theta[i] + s * xi[i];
      return std::sqrt(squared_distance(project(ball, y).point, theta));
    };
    const double gap = err(s1) - err(s2);
    worst = std::max(worst, gap);
    violations += gap > 1e-7;
  }
  auto rep = make_report("monotone(p=" + format_real(p) + ",d=" + std::to_string(d) + ")", worst, 1e-7, true, draws, seed);
  rep.note = std::to_string(violations) + " violations";
  return rep;
}

/// Largest relative deviation of lambda* from ||Y - Pi(Y)||_q / ||Pi(Y)||_p^{p/q}
/// over draws outside the unit ball, and the largest KKT residual.
inline std::pair<CheckReport, CheckReport> check_multiplier_identity(double p, std::size_t d, std::size_t draws,
                                                                     std::uint64_t seed) {
  const LpBall ball = LpBall::norm_ball(p, 1.0, d);
  const double q = conjugate_index(p);
  double worst_rel = 0.0, worst_kkt = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; used < draws && t < 100 * draws; ++t) {
    NormalStream rng({seed, d, t, 6});
    Vector y = rng.draw(d);
    const double scale = std::exp(-2.0 + 4.0 * rng.uniform());
    for (double& v : y) v *= scale;
    if (lp_norm(y, p) <= 1.0) continue;
    ++used;
    const auto res = project(ball, y);
    Vector resid(d);
    for (std::size_t i = 0; i < d; ++i) resid[i] = y[i] - res.point[i];
    const double predicted = lp_norm(resid, q) / std::pow(lp_norm(res.point, p), p / q);
    worst_rel = std::max(worst_rel, std::fabs(res.multiplier - predicted) / predicted);
    worst_kkt = std::max(worst_kkt, res.kkt_residual);
  }
  const std::string tag = "(p=" + format_real(p) + ",d=" + std::to_string(d) + ")";
  return {make_report("multiplier_identity" + tag, worst_rel, 1e-5, true, used, seed),
          make_report("kkt_residual" + tag, worst_kkt, 1e-8, true, used, seed)};
}

/// Agreement of project() with the grid oracle on random inputs: l2 distance
/// for convex balls, objective excess for p < 1.
inline CheckReport check_oracle_agreement(double p, std::size_t d, std::size_t draws, std::uint64_t seed,
                                          double resolution = 1e-3) {
  const LpBall ball = LpBall::norm_ball(p, 1.0, d);
  double worst = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    NormalStream rng({seed, d, t, 7});
    Vector y = rng.draw(d);
    const double scale = std::exp(-1.0 + 3.0 * rng.uniform());
    for (double& v : y) v *= scale;
    const auto fast = project(ball, y);
    const auto slow = brute_force_projection(ball, y, resolution);
    const double gap = p >= 1.0 ? std::sqrt(squared_distance(fast.point, slow))
                                : projection_objective(y, fast.point) - projection_objective(y, slow);
    worst = std::max(worst, gap);
  }
  return make_report("oracle(p=" + format_real(p) + ",d=" + std::to_string(d) + ")", worst, p >= 1.0 ? 1e-3 : 1e-6,
                     true, draws, seed);
}

/// mean - 4 stderr of the sparse-cap width against 6 s log(e d / s).
inline CheckReport check_sparse_cap(std::size_t d, std::size_t s, std::size_t reps, std::uint64_t seed) {
  const auto [mean, se] = sparse_cap_width(d, s, reps, seed);
  auto r = make_report("sparse_cap(d=" + std::to_string(d) + ",s=" + std::to_string(s) + ")", mean - 4.0 * se,
                       sparse_cap_bound(d, s), true, reps, seed);
  r.note = "mean " + format_real(mean);
  return r;
}

/// Largest ||x||_p^p of the witness over random draws; fails on any infeasible witness.
inline CheckReport check_phi_witness(std::size_t d, double p, std::size_t draws, std::uint64_t seed) {
  const double eps_min = std::pow(static_cast<double>(d), -(2.0 - p) / (2.0 * p));
  double worst = 0.0;
  std::size_t failures = 0;
  for (std::size_t t = 0; t < draws; ++t) {
    NormalStream rng({seed, d, t, 8});
    const Vector xi = rng.draw(d);
    const double eps = eps_min * std::pow(1.0 / eps_min, rng.uniform());
    try {
      const auto w = phi_lower_witness(xi, p, eps);
      worst = std::max(worst, lp_pow_sum(w.x, p));
    } catch (const Error&) {
      ++failures;
    }
  }
  auto r = make_report("phi_witness(d=" + std::to_string(d) + ",p=" + format_real(p) + ")", worst, 2.0, true, draws,
                       seed);
  if (failures > 0) {
    r.pass = false;
    r.note = std::to_string(failures) + " infeasible witnesses";
  }
  return r;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kkt",       "oracle",     "monotone", "widths",
                                              "smallball", "noiseterm", "variance"};
  return names;
}

/// Runs one named suite, or every suite for "all". `reps` drives the
/// probability checks; the solver suites use fixed draw counts.
inline std::vector<CheckReport> verify_suite(const std::string& suite, std::uint64_t seed, std::size_t reps = 10000) {
  std::vector<CheckReport> out;
  if (suite == "all") {
    for (const auto& name : suite_names()) {
      auto part = verify_suite(name, seed, reps);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (suite == "kkt") {
    for (double p : {1.2, 1.5, 1.8})
      for (std::size_t d : {10, 100}) {
        auto [identity, kkt] = check_multiplier_identity(p, d, 200, seed);
        out.push_back(identity);
        out.push_back(kkt);
      }
  } else if (suite == "oracle") {
    for (double p : {0.5, 1.0, 1.3, 1.5, 2.0, 3.0, kInf})
      for (std::size_t d : {1, 2, 3}) out.push_back(check_oracle_agreement(p, d, 50, seed));
  } else if (suite == "monotone") {
    for (double p : {1.0, 1.5, 2.0, kInf}) out.push_back(check_monotonicity(p, 20, 200, seed));
  } else if (suite == "widths") {
    for (auto [d, s] : {std::pair<std::size_t, std::size_t>{10, 1}, {10, 3}, {100, 5}, {1000, 10}})
      out.push_back(check_sparse_cap(d, s, reps, seed));
    for (double p : {0.3, 0.5, 0.8}) out.push_back(check_phi_witness(200, p, 1000, seed));
  } else if (suite == "smallball") {
    out.push_back(check_small_ball(44, 2.0, reps, seed));
    out.push_back(check_small_ball(1000, 3.0, reps, seed));
  } else if (suite == "noiseterm") {
    out.push_back(check_noise_term(100, 3.0, 0.5, reps, seed));
    out.push_back(check_noise_term(1000, 3.0, 0.5, reps, seed));
  } else if (suite == "variance") {
    const std::size_t vreps = std::min<std::size_t>(reps, 400);
    out.push_back(check_mle_variance(LpBall::norm_ball(2.0, 1.0, 100), Vector(100, 0.0), 0.1, vreps, seed));
    const std::size_t d = 1000;
    const double p = 1.5, q = conjugate_index(p);
    const double sigma = 10.0 / (std::sqrt(q) * std::pow(static_cast<double>(d), 1.0 / q));
    out.push_back(check_mle_variance(LpBall::norm_ball(p, 1.0, d), spike_instance(d), sigma, vreps, seed));
  } else {
    throw Error(ErrorKind::invalid_parameter, "unknown suite '" + suite + "'");
  }
  return out;
}

inline std::string format_report(const CheckReport& r) {
  std::string line = std::string(r.inconclusive ? "INCONCLUSIVE " : (r.pass ? "PASS " : "FAIL ")) + r.name +
                     " statistic=" + format_real(r.statistic) + (r.upper ? " <= " : " >= ") +
                     format_real(r.threshold) + " trials=" + std::to_string(r.trials) + " seed=" + std::to_string(r.seed);
  if (!r.note.empty()) line += " (" + r.note + ")";
  return line;
}

}  // namespace lpseq
