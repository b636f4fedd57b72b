#pragma once

// Scalar kernels behind lp projection: the shrinkage fixed point
//   psi + lambda * psi^(p-1) = t
// and the proximal operator of x -> (lambda/p) x^p on x >= 0.
//
// Roots are found in the log domain u = log(psi), where
//   h(u) = e^u + lambda * e^((p-1) u) - t
// is a sum of exponentials and therefore convex for every p. Newton's method
// started on the correct side of a root of a convex function converges
// monotonically, so each solve is a Newton iteration safeguarded by a bracket.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lpseq/errors.hpp"
#include "lpseq/norms.hpp"

namespace lpseq {

inline constexpr double kDefaultScalarTol = 1e-12;

struct ShrinkageQuery {
  double p = 2.0;
  double lambda = 0.0;
  double t = 0.0;
  double tol = kDefaultScalarTol;
};

namespace detail {

inline void validate(const ShrinkageQuery& q) {
  require(std::isfinite(q.p) && q.p > 0.0, ErrorKind::invalid_parameter, "norm index p must be in (0, inf)");
  require(std::isfinite(q.lambda) && q.lambda >= 0.0, ErrorKind::invalid_parameter, "lambda must be >= 0");
  require(std::isfinite(q.t) && q.t >= 0.0, ErrorKind::invalid_parameter, "t must be >= 0");
  require(q.tol > 0.0, ErrorKind::invalid_parameter, "tol must be > 0");
}

inline double flush(double x) { return x < kFlushToZero ? 0.0 : x; }

inline double fixed_point_residual(double psi, double lambda, double t, double p) {
  return psi + lambda * abs_pow(psi, p - 1.0) - t;
}

/// Root of h(u) = e^u + lambda e^{(p-1)u} - t on the monotone branch that
/// contains `start`. `lo`/`hi` bracket the root in u; `start` is one of them
/// and must lie on the side where h >= 0.
inline double log_newton(double p, double lambda, double t, double lo, double hi, double start,
                         double tol) {
  const double e = p - 1.0;
  const bool from_right = (start == hi);
  double u = start;
  for (int it = 0; it < 200; ++it) {
    const double x = std::exp(u);
    const double w = lambda * std::exp(e * u);
    const double h = x + w - t;
    if (std::fabs(h) <= tol) return u;
    if ((h > 0.0) == from_right) {
      hi = u;
    } else {
      lo = u;
    }
    const double dh = x + e * w;
    double next = (dh != 0.0) ? u - h / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - u) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(u))) {
      return next;
    }
    u = next;
  }
  return u;
}

}  // namespace detail

/// Soft threshold sign(t) * max(|t| - lambda, 0).
inline double soft_threshold_scalar(double t, double lambda) {
  const double a = std::fabs(t) - lambda;
  return a > 0.0 ? sign_of(t) * a : 0.0;
}

/// Unique nonnegative solution of psi + lambda psi^(p-1) = t for p >= 1.
///
/// p = 1 reduces to (t - lambda)_+ and p = 2 to t / (1 + lambda). The result
/// lies in [0, t], equals t when lambda = 0, and is flushed to 0 below 1e-300.
inline double psi_solve(const ShrinkageQuery& q) {
  detail::validate(q);
  require(q.p >= 1.0, ErrorKind::invalid_parameter,
          "psi_solve needs p >= 1; use prox_power for p in (0, 1)");
  const double p = q.p, lambda = q.lambda, t = q.t;
  if (t == 0.0) return 0.0;
  if (lambda == 0.0) return t;
  if (p == 1.0) return detail::flush(std::max(t - lambda, 0.0));
  if (p == 2.0) return detail::flush(t / (1.0 + lambda));

  // psi <= t and lambda psi^(p-1) <= t bound the root from above; the root is
  // also at least the smaller of t/2 and (t / 2 lambda)^(1/(p-1)).
  const double log_t = std::log(t);
  const double log_l = std::log(lambda);
  const double inv = 1.0 / (p - 1.0);
  const double u_hi = std::min(log_t, (log_t - log_l) * inv);
  if (u_hi < std::log(kFlushToZero)) return 0.0;
  const double u_lo = std::min(log_t - M_LN2, (log_t - M_LN2 - log_l) * inv);
  const double u = detail::log_newton(p, lambda, t, u_lo, u_hi, u_hi, q.tol);
  return detail::flush(std::min(std::exp(u), t));
}

/// Positive roots of x + lambda x^(p-1) = t for p in (0, 1), ascending.
///
/// x -> x + lambda x^(p-1) is convex on (0, inf) with its minimum at
/// x_m = (lambda (1 - p))^(1/(2-p)), so there are zero, one or two roots.
inline std::vector<double> stationary_roots(const ShrinkageQuery& q) {
  detail::validate(q);
  require(q.p < 1.0, ErrorKind::invalid_parameter, "stationary_roots is for p in (0, 1)");
  const double p = q.p, lambda = q.lambda, t = q.t;
  std::vector<double> roots;
  if (t == 0.0 || lambda == 0.0) {
    if (t > 0.0) roots.push_back(t);
    return roots;
  }
  const double x_m = std::pow(lambda * (1.0 - p), 1.0 / (2.0 - p));
  const double g_min = x_m * (2.0 - p) / (1.0 - p);
  if (g_min > t) return roots;
  const double u_m = std::log(x_m);
  if (g_min == t) {
    roots.push_back(x_m);
    return roots;
  }
  // Left branch: lambda x^(p-1) = t gives a point left of the small root.
  const double u_left = (std::log(t) - std::log(lambda)) / (p - 1.0);
  if (u_left > std::log(kFlushToZero)) {
    const double u_small = detail::log_newton(p, lambda, t, u_left, u_m, u_left, q.tol);
    roots.push_back(std::exp(u_small));
  }
  const double u_large = detail::log_newton(p, lambda, t, u_m, std::log(t), std::log(t), q.tol);
  roots.push_back(std::min(std::exp(u_large), t));
  return roots;
}

/// The larger positive root for p in (0, 1), if any: the branch a minimizer sits on.
inline std::optional<double> large_root(const ShrinkageQuery& q) {
  auto roots = stationary_roots(q);
  if (roots.empty()) return std::nullopt;
  return roots.back();
}

/// 1/2 (x - t)^2 + (lambda/p) x^p.
inline double prox_objective(double x, double t, double lambda, double p) {
  const double diff = x - t;
  return 0.5 * diff * diff + (lambda / p) * abs_pow(x, p);
}

/// argmin_{x >= 0} 1/2 (x - t)^2 + (lambda/p) x^p.
///
/// Identical to psi_solve for p >= 1. For p in (0, 1) the candidates are 0 and
/// the stationary roots; ties go to the smaller candidate, so to 0 first.
inline double prox_power(const ShrinkageQuery& q) {
  detail::validate(q);
  if (q.p >= 1.0) return psi_solve(q);
  if (q.t == 0.0) return 0.0;
  if (q.lambda == 0.0) return q.t;
  double best = 0.0;
  double best_val = prox_objective(0.0, q.t, q.lambda, q.p);
  for (double x : stationary_roots(q)) {
    const double v = prox_objective(x, q.t, q.lambda, q.p);
    if (v < best_val) {
      best = x;
      best_val = v;
    }
  }
  return detail::flush(best);
}

}  // namespace lpseq
