#pragma once

// Euclidean projection onto r * B^d_p for p in [0, inf].
//
//   p = 0        keep the s largest magnitudes
//   p = inf      coordinatewise clipping
//   p = 1        sort-and-threshold water filling
//   p > 1        x_i = sign(y_i) Psi_{p,lambda*}(|y_i|), lambda* from the dual sum
//   p in (0,1)   multiplier scan + support polish, with a duality-gap report
//
// Every p > 0 path solves on the unit ball with y / r and scales back, so the
// reported multiplier is the unit-ball one: |y_i|/r = |x_i|/r + lambda* (|x_i|/r)^(p-1).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "lpseq/errors.hpp"
#include "lpseq/lp_ball.hpp"
#include "lpseq/norms.hpp"
#include "lpseq/scalar_shrinkage.hpp"

namespace lpseq {

struct ProjectionOptions {
  double dual_tol = 1e-10;  // |dual_sum(lambda) - 1| stopping gap
  double scalar_tol = kDefaultScalarTol;
  int scan_points = 64;     // multiplier grid for p in (0, 1)
};

struct ProjectionResult {
  Vector point;
  double multiplier = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  /// 1/2 ||x - y||^2 minus the best Lagrange dual bound found; p in (0, 1) only.
  std::optional<double> duality_gap;
};

namespace detail {

inline void check_input(const LpBall& ball, std::span<const double> y) {
  ball.validate();
  require(y.size() == ball.dim, ErrorKind::dimension_mismatch, "input length differs from ball dimension");
  for (double v : y) require(std::isfinite(v), ErrorKind::non_finite_input, "input has a non-finite entry");
}

inline Vector magnitudes(std::span<const double> y, double scale) {
  Vector a(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) a[i] = std::fabs(y[i]) / scale;
  return a;
}

/// Indices sorted by decreasing magnitude, ties by lowest index.
inline std::vector<std::size_t> order_by_magnitude(std::span<const double> a) {
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return std::fabs(a[i]) > std::fabs(a[j]);
  });
  return idx;
}

}  // namespace detail

/// Keeps the s largest-magnitude entries; ties go to the lowest index.
inline Vector project_top_s(std::size_t s, std::span<const double> y) {
  require(s >= 1 && s <= y.size(), ErrorKind::invalid_parameter, "sparsity must lie in {1..d}");
  const auto idx = detail::order_by_magnitude(y);
  Vector out(y.size(), 0.0);
  for (std::size_t j = 0; j < s; ++j) out[idx[j]] = y[idx[j]];
  return out;
}

/// Coordinatewise sign(y_i) min(|y_i|, r).
inline Vector project_clip(double r, std::span<const double> y) {
  require(r > 0.0, ErrorKind::invalid_parameter, "radius must be > 0");
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::clamp(y[i], -r, r);
  return out;
}

/// Threshold tau with sum_i (a_i - tau)_+ = 1 for magnitudes a with sum a_i > 1.
inline double l1_threshold(std::span<const double> a) {
  Vector u(a.begin(), a.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  return std::max(tau, 0.0);
}

/// sum_i Psi_{p,lambda}(|y_i| / r)^p for p > 1.
inline double dual_sum(double lambda, std::span<const double> y, double p, double r,
                       double scalar_tol = kDefaultScalarTol) {
  require(p > 1.0, ErrorKind::invalid_parameter, "dual_sum needs p > 1");
  require(lambda >= 0.0, ErrorKind::invalid_parameter, "lambda must be >= 0");
  double s = 0.0;
  for (double v : y) s += abs_pow(psi_solve({p, lambda, std::fabs(v) / r, scalar_tol}), p);
  return s;
}

struct MultiplierSolve {
  double lambda = 0.0;
  int iterations = 0;
};

namespace detail {

/// Dual sum and its derivative in lambda over magnitudes already divided by r.
inline std::pair<double, double> dual_sum_and_slope(double lambda, std::span<const double> a, double p,
                                                    double scalar_tol) {
  double s = 0.0, ds = 0.0;
  for (double t : a) {
    const double psi = psi_solve({p, lambda, t, scalar_tol});
    if (psi == 0.0) continue;
    const double psi_pm1 = abs_pow(psi, p - 1.0);
    s += psi_pm1 * psi;
    // d psi / d lambda = -psi^(p-1) / (1 + lambda (p-1) psi^(p-2))
    const double denom = 1.0 + lambda * (p - 1.0) * abs_pow(psi, p - 2.0);
    ds -= p * psi_pm1 * psi_pm1 / denom;
  }
  return {s, ds};
}

inline MultiplierSolve solve_multiplier(std::span<const double> a, double p, double dual_tol,
                                        double scalar_tol) {
  MultiplierSolve out;
  double lo = 0.0, hi = 1.0;
  auto [s_lo, ds_lo] = dual_sum_and_slope(lo, a, p, scalar_tol);
  auto [s_hi, ds_hi] = dual_sum_and_slope(hi, a, p, scalar_tol);
  out.iterations = 2;
  while (s_hi > 1.0 + dual_tol) {
    lo = hi;
    s_lo = s_hi;
    ds_lo = ds_hi;
    hi *= 2.0;
    require(std::isfinite(hi), ErrorKind::bracket_failure, "multiplier bracket diverged");
    std::tie(s_hi, ds_hi) = dual_sum_and_slope(hi, a, p, scalar_tol);
    ++out.iterations;
  }
  if (s_hi >= 1.0 - dual_tol) {
    out.lambda = hi;
    return out;
  }
  // The dual sum is convex and decreasing in lambda, so Newton steps from the
  // left end stay left of the root. Bisection covers any step leaving [lo, hi].
  double lambda = lo, s = s_lo, ds = ds_lo;
  for (int it = 0; it < 300; ++it) {
    if (std::fabs(s - 1.0) <= dual_tol) break;
    if (s > 1.0) lo = lambda; else hi = lambda;
    if (hi - lo <= 1e-14 * (1.0 + lambda)) break;
    double next = (ds < 0.0) ? lambda - (s - 1.0) / ds : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
    std::tie(s, ds) = dual_sum_and_slope(lambda, a, p, scalar_tol);
    ++out.iterations;
  }
  // Land on the feasible side of the bracket if the last iterate is short.
  if (s > 1.0 + dual_tol) lambda = hi;
  out.lambda = lambda;
  return out;
}

}  // namespace detail

/// lambda* = inf{lambda >= 0 : dual_sum(lambda) <= 1}, for p > 1 and ||y||_p > r.
///
/// Brackets by doubling from lambda = 1, then runs a Newton iteration on the
/// dual sum from the left end, safeguarded by bisection on that bracket.
inline double find_lambda_star(std::span<const double> y, double p, double r, double tol = 1e-10) {
  require(p > 1.0, ErrorKind::invalid_parameter, "find_lambda_star needs p > 1");
  require(r > 0.0, ErrorKind::invalid_parameter, "radius must be > 0");
  for (double v : y) require(std::isfinite(v), ErrorKind::bracket_failure, "non-finite input");
  const Vector a = detail::magnitudes(y, r);
  if (lp_pow_sum(a, p) <= 1.0) return 0.0;
  return detail::solve_multiplier(a, p, tol, kDefaultScalarTol).lambda;
}

/// Stationarity and complementary slackness residual on the unit-ball scale:
/// max_i |y_i - x_i - lambda sign(x_i)|x_i|^(p-1)| together with
/// |lambda (||x||_p^p - 1)| and any excess of ||x||_p^p over 1 (x, y divided by r).
inline double kkt_residual(std::span<const double> y, const ProjectionResult& result, double p, double r) {
  require(p > 1.0, ErrorKind::invalid_parameter, "kkt_residual needs p > 1");
  const double lambda = result.multiplier;
  double stat = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yi = y[i] / r, xi = result.point[i] / r;
    const double g = yi - xi - lambda * sign_of(xi) * abs_pow(xi, p - 1.0);
    stat = std::max(stat, std::fabs(g));
  }
  const double mass = lp_pow_sum(result.point, p) / std::pow(r, p);
  const double slack = std::fabs(lambda * (mass - 1.0));
  return std::max({stat, slack, std::max(mass - 1.0, 0.0)});
}

namespace detail {

// Nonconvex case p in (0, 1), working on magnitudes a of y / r.
struct NonconvexSolver {
  std::span<const double> a;
  double p;
  const ProjectionOptions& opt;

  NonconvexSolver(std::span<const double> mags, double index, const ProjectionOptions& options)
      : a(mags), p(index), opt(options) {}

  double best_dual = -kInf;
  double best_obj = kInf;
  Vector best_x;
  double best_lambda = 0.0;
  int evals = 0;

  double half_dist(const Vector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += 0.5 * (x[i] - a[i]) * (x[i] - a[i]);
    return s;
  }

  void offer(const Vector& x, double lambda) {
    // Bisection ends at mass 1 up to summation order, hence the slack.
    if (lp_pow_sum(x, p) > 1.0 + 1e-12) return;
    const double obj = half_dist(x);
    if (obj < best_obj) {
      best_obj = obj;
      best_x = x;
      best_lambda = lambda;
    }
  }

  // Global minimizer of the penalized problem; equivalent to prox_power but skips
  // the small root, which never beats x = 0.
  double penalized_coordinate(double lambda, double t) const {
    if (t == 0.0) return 0.0;
    if (lambda == 0.0) return t;
    const auto x = large_root({p, lambda, t, opt.scalar_tol});
    if (!x) return 0.0;
    return prox_objective(*x, t, lambda, p) < 0.5 * t * t ? *x : 0.0;
  }

  /// Penalized minimizer x(lambda); records the dual bound and any feasible point.
  double evaluate(double lambda, Vector& x) {
    ++evals;
    double dual = -lambda / p, mass = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      x[i] = penalized_coordinate(lambda, a[i]);
      const double xp = abs_pow(x[i], p);
      mass += xp;
      dual += 0.5 * (x[i] - a[i]) * (x[i] - a[i]) + lambda / p * xp;
    }
    best_dual = std::max(best_dual, dual);
    offer(x, lambda);
    return mass;
  }

  /// Largest multiplier for which x + mu x^(p-1) = t has a root.
  static double mu_max(double t, double p) {
    return std::pow(t * (1.0 - p) / (2.0 - p), 2.0 - p) / (1.0 - p);
  }

  /// Boundary KKT points on the top-k support. The support of a minimizer is
  /// a top-k set, and second-order conditions allow at most one coordinate,
  /// the smallest, on the small-root branch. Both configurations are tried.
  void polish(const std::vector<std::size_t>& order, std::size_t k) {
    Vector x(a.size(), 0.0);
    double mass0 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (a[order[j]] == 0.0) return;
      mass0 += abs_pow(a[order[j]], p);
    }
    const double cap = mu_max(a[order[k - 1]], p);
    auto fill = [&](double mu, bool small_last) {
      double mass = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t i = order[j];
        if (mu == 0.0) {
          x[i] = a[i];
        } else {
          const auto roots = stationary_roots({p, mu, a[i], opt.scalar_tol});
          if (roots.empty()) {
            x[i] = 0.0;
          } else if (small_last && j + 1 == k) {
            // A lone root away from the tangent point means the small one underflowed.
            x[i] = roots.size() == 2 ? roots.front() : (mu >= cap * (1.0 - 1e-9) ? roots.front() : 0.0);
          } else {
            x[i] = roots.back();
          }
        }
        mass += abs_pow(x[i], p);
      }
      return mass;
    };
    if (mass0 <= 1.0) {
      fill(0.0, false);
      offer(x, 0.0);
      return;
    }

    // All on the large branch: mass decreases in mu.
    if (fill(cap, false) <= 1.0) {
      double lo = 0.0, hi = cap;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        ++evals;
        if (fill(mid, false) > 1.0) lo = mid; else hi = mid;
      }
      fill(hi, false);
      offer(x, hi);
    }

    // Smallest coordinate on the small branch: mass is not monotone, so scan
    // for sign changes of mass - 1 and bisect each.
    // Geometric in mu / cap up to 1/2, then geometric in 1 - mu / cap down to
    // 1e-10, since the small root moves like a square root near the cap.
    constexpr int kHalf = 32;
    double prev_mu = 0.0, prev_f = 0.0;
    for (int j = 0; j < 2 * kHalf; ++j) {
      const double frac = j < kHalf ? 0.5 * std::pow(10.0, -12.0 + 12.0 * j / (kHalf - 1))
                                    : 1.0 - 0.5 * std::pow(10.0, -10.0 * (j - kHalf + 1) / kHalf);
      const double mu = cap * frac;
      ++evals;
      const double f = fill(mu, true) - 1.0;
      if (j > 0 && (f > 0.0) != (prev_f > 0.0)) {
        double lo = prev_mu, hi = mu;
        const bool rising = f > 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          ++evals;
          if ((fill(mid, true) > 1.0) == rising) hi = mid; else lo = mid;
        }
        fill(rising ? lo : hi, true);
        offer(x, rising ? lo : hi);
      }
      prev_mu = mu;
      prev_f = f;
    }
  }

  void run() {
    const std::size_t d = a.size();
    const double a_max = *std::max_element(a.begin(), a.end());
    const double center = std::pow(a_max, 2.0 - p);
    const int n = std::max(opt.scan_points, 2);
    Vector x(d);
    std::vector<double> lambdas(n), masses(n);
    std::vector<std::size_t> supports(n);
    for (int j = 0; j < n; ++j) {
      lambdas[j] = center * std::pow(10.0, -6.0 + 12.0 * j / (n - 1));
      masses[j] = evaluate(lambdas[j], x);
      supports[j] = static_cast<std::size_t>(lp_pow_sum(x, 0.0));
    }
    // x(lambda) has nonincreasing mass in lambda; bisect the crossing of 1.
    std::size_t k_lo = 0, k_hi = 0;
    int cross = -1;
    for (int j = 0; j + 1 < n; ++j) {
      if (masses[j] > 1.0 && masses[j + 1] <= 1.0) {
        cross = j;
        break;
      }
    }
    if (cross >= 0) {
      double lo = lambdas[cross], hi = lambdas[cross + 1];
      k_lo = supports[cross + 1];
      k_hi = supports[cross];
      for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate(mid, x) > 1.0) {
          lo = mid;
          k_hi = static_cast<std::size_t>(lp_pow_sum(x, 0.0));
        } else {
          hi = mid;
          k_lo = static_cast<std::size_t>(lp_pow_sum(x, 0.0));
        }
      }
    } else {
      k_lo = supports.back();
      k_hi = supports.front();
    }
    const auto order = order_by_magnitude(a);
    // The nearest vertex is always feasible; a_max - 1 is its multiplier when a_max >= 1.
    Vector vertex(d, 0.0);
    vertex[order[0]] = 1.0;
    offer(vertex, std::max(a[order[0]] - 1.0, 0.0));
    std::size_t nonzero = 0;
    for (double t : a) nonzero += (t > 0.0);
    std::size_t first = 1, last = nonzero;
    if (d > 16) {
      const std::size_t k_min = std::min(k_lo, k_hi);
      first = k_min > 3 ? k_min - 2 : 1;
      last = std::min(nonzero, std::max(k_lo, k_hi) + 2);
    }
    for (std::size_t k = first; k <= last; ++k) polish(order, k);
    // Dual bound at the reported multiplier as well.
    if (best_lambda > 0.0) evaluate(best_lambda, x);
  }
};

inline double nonconvex_kkt(std::span<const double> a, const Vector& x, double lambda, double p) {
  double stat = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (x[i] == 0.0) continue;
    mass += abs_pow(x[i], p);
    stat = std::max(stat, std::fabs(a[i] - x[i] - lambda * abs_pow(x[i], p - 1.0)));
  }
  return std::max({stat, std::fabs(lambda * (mass - 1.0)), std::max(mass - 1.0, 0.0)});
}

}  // namespace detail

/// Euclidean projection of y onto the ball.
inline ProjectionResult project(const LpBall& ball, std::span<const double> y,
                                const ProjectionOptions& opt = {}) {
  detail::check_input(ball, y);
  ProjectionResult res;
  if (ball.is_sparse()) {
    res.point = project_top_s(ball.sparsity, y);
    return res;
  }
  const double r = ball.radius, p = ball.p;
  if (ball.is_box()) {
    res.point = project_clip(r, y);
    double excess = 0.0;
    for (double v : y) excess += std::max(std::fabs(v) / r - 1.0, 0.0);
    res.multiplier = excess;  // ||y/r - x/r||_1, the dual-norm form of the multiplier
    return res;
  }

  const Vector a = detail::magnitudes(y, r);
  if (lp_pow_sum(a, p) <= 1.0) {
    res.point.assign(y.begin(), y.end());
    return res;
  }

  Vector mag(a.size());
  if (p == 1.0) {
    const double tau = l1_threshold(a);
    for (std::size_t i = 0; i < a.size(); ++i) mag[i] = std::max(a[i] - tau, 0.0);
    res.multiplier = tau;
    res.iterations = 1;
    double stat = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      stat = std::max(stat, mag[i] > 0.0 ? std::fabs(a[i] - mag[i] - tau) : std::max(a[i] - tau, 0.0));
    }
    res.kkt_residual = std::max(stat, std::fabs(tau * (lp_pow_sum(mag, 1.0) - 1.0)));
  } else if (p > 1.0) {
    const auto solve = detail::solve_multiplier(a, p, opt.dual_tol, opt.scalar_tol);
    for (std::size_t i = 0; i < a.size(); ++i) mag[i] = psi_solve({p, solve.lambda, a[i], opt.scalar_tol});
    res.multiplier = solve.lambda;
    res.iterations = solve.iterations;
  } else {
    detail::NonconvexSolver solver(a, p, opt);
    solver.run();
    mag = solver.best_x;
    res.multiplier = solver.best_lambda;
    res.iterations = solver.evals;
    res.duality_gap = r * r * std::max(solver.best_obj - solver.best_dual, 0.0);
    res.kkt_residual = detail::nonconvex_kkt(a, mag, res.multiplier, p);
  }

  res.point.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) res.point[i] = sign_of(y[i]) * mag[i] * r;
  if (p > 1.0) res.kkt_residual = kkt_residual(y, res, p, r);
  return res;
}

/// 1/2 ||x - y||^2.
inline double projection_objective(std::span<const double> y, std::span<const double> x) {
  return 0.5 * squared_distance(y, x);
}

}  // namespace lpseq
