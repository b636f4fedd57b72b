#pragma once

// Order-level minimax control functions over r * B^d_p and the classifier for
// when the projection estimator attains them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "lpseq/errors.hpp"
#include "lpseq/norms.hpp"

namespace lpseq {

inline constexpr double kLowerConstant = 1.0 / 868.0;
inline constexpr double kUpperConstant = 6.0;

struct RateQuery {
  double p = 2.0;
  double d = 1.0;          // real-valued so that very large scalings stay representable
  double sigma = 1.0;      // single-sample noise level
  double radius = 1.0;     // p > 0
  double sparsity = 1.0;   // p = 0
  std::size_t samples = 1;
  std::optional<double> tau;  // per-sample noise; overrides sigma as tau / sqrt(n)

  double effective_sigma() const {
    return tau ? *tau / std::sqrt(static_cast<double>(samples)) : sigma;
  }

  void validate() const {
    require(!std::isnan(p) && p >= 0.0, ErrorKind::invalid_parameter, "norm index p must be in [0, inf]");
    require(std::isfinite(d) && d >= 1.0, ErrorKind::invalid_parameter, "dimension must be >= 1");
    require(samples >= 1, ErrorKind::invalid_parameter, "samples must be >= 1");
    if (tau) {
      require(std::isfinite(*tau) && *tau > 0.0, ErrorKind::invalid_parameter, "tau must be > 0");
    } else {
      require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_parameter, "sigma must be > 0");
    }
    if (p == 0.0) {
      require(sparsity >= 1.0 && sparsity <= d, ErrorKind::invalid_parameter, "sparsity must lie in [1, d]");
    } else {
      require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_parameter, "radius must be > 0");
    }
  }
};

/// Threshold index 1 + 1/(1 + log d).
inline double p_threshold(double d) { return 1.0 + 1.0 / (1.0 + std::log(d)); }

/// Control function m_{d,p}(sigma / r) * r^2.
inline double control_function(const RateQuery& q) {
  q.validate();
  const double sigma = q.effective_sigma();
  const double d = q.d;
  if (q.p == 0.0) return sigma * sigma * q.sparsity * std::log(M_E * d / q.sparsity);

  const double r = q.radius;
  const double s = sigma / r;
  const double s2 = s * s;
  double m;
  if (q.p >= 2.0) {
    const double width = std::isinf(q.p) ? d : std::pow(d, 1.0 - 2.0 / q.p);
    m = std::min(s2 * d, width);
  } else if (s2 >= 1.0 / (1.0 + std::log(d))) {
    m = 1.0;
  } else if (s <= std::pow(d, -1.0 / q.p)) {
    m = s2 * d;
  } else {
    const double log_arg = 1.0 + std::log(d) + q.p * std::log(s);
    m = std::pow(s2 * log_arg, 1.0 - q.p / 2.0);
  }
  return m * r * r;
}

struct RateBounds {
  double control = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// False for p < 1, where only the upper constant has been established.
  bool two_sided = true;
};

inline RateBounds rate_bounds(const RateQuery& q) {
  RateBounds b;
  b.control = control_function(q);
  require(b.control > 0.0, ErrorKind::degenerate_input, "control function must be positive");
  b.lower = kLowerConstant * b.control;
  b.upper = kUpperConstant * b.control;
  b.two_sided = q.p >= 1.0;
  return b;
}

enum class RegimeLabel {
  optimal_p_ge_2,
  optimal_p_near_1,
  optimal_extreme_noise,
  optimal_sparse,
  suboptimal,
  boundary,
};

constexpr std::string_view to_string(RegimeLabel label) noexcept {
  switch (label) {
    case RegimeLabel::optimal_p_ge_2: return "optimal_p_ge_2";
    case RegimeLabel::optimal_p_near_1: return "optimal_p_near_1";
    case RegimeLabel::optimal_extreme_noise: return "optimal_extreme_noise";
    case RegimeLabel::optimal_sparse: return "optimal_sparse";
    case RegimeLabel::suboptimal: return "suboptimal";
    case RegimeLabel::boundary: return "boundary";
  }
  return "unknown";
}

/// Which part of the suboptimal noise interval sigma / r falls in.
enum class Subinterval { none, spike, flat };

constexpr std::string_view to_string(Subinterval s) noexcept {
  switch (s) {
    case Subinterval::none: return "none";
    case Subinterval::spike: return "spike";
    case Subinterval::flat: return "flat";
  }
  return "unknown";
}

struct RegimeReport {
  RegimeLabel label = RegimeLabel::boundary;
  double p_threshold = 0.0;
  double sigma_lo = 0.0;   // suboptimal interval (d^{-1/p}, 1/sqrt(1 + log d)), in units of r
  double sigma_hi = 0.0;
  double spike_lo = 0.0;   // 1/(sqrt(q) d^{1/q}): the spike subinterval starts here
  double flat_hi = 0.0;    // d^{-1/q}: the flat subinterval ends here
  Subinterval subinterval = Subinterval::none;
  RateBounds bounds;
};

namespace detail {
inline bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b));
}
}  // namespace detail

/// Labels (sigma, p, d, r). Points within relative 1e-12 of a case boundary in
/// p or sigma are labeled boundary.
inline RegimeReport classify_regime(const RateQuery& q) {
  RegimeReport rep;
  rep.bounds = rate_bounds(q);
  const double d = q.d;
  rep.p_threshold = p_threshold(d);
  rep.sigma_hi = 1.0 / std::sqrt(1.0 + std::log(d));
  if (q.p == 0.0) {
    rep.label = RegimeLabel::optimal_sparse;
    return rep;
  }
  if (q.p > 0.0 && q.p < 2.0) {
    rep.sigma_lo = std::pow(d, -1.0 / q.p);
    if (q.p > 1.0) {
      const double qc = conjugate_index(q.p);
      rep.spike_lo = 1.0 / (std::sqrt(qc) * std::pow(d, 1.0 / qc));
      rep.flat_hi = std::pow(d, -1.0 / qc);
    }
  }
  if (q.p >= 2.0) {
    rep.label = RegimeLabel::optimal_p_ge_2;
    return rep;
  }
  if (detail::nearly_equal(q.p, rep.p_threshold)) {
    rep.label = RegimeLabel::boundary;
    return rep;
  }
  if (q.p < rep.p_threshold) {
    rep.label = RegimeLabel::optimal_p_near_1;
    return rep;
  }
  const double s = q.effective_sigma() / q.radius;
  if (detail::nearly_equal(s, rep.sigma_lo) || detail::nearly_equal(s, rep.sigma_hi)) {
    rep.label = RegimeLabel::boundary;
    return rep;
  }
  if (s < rep.sigma_lo || s > rep.sigma_hi) {
    rep.label = RegimeLabel::optimal_extreme_noise;
    return rep;
  }
  rep.label = RegimeLabel::suboptimal;
  rep.subinterval = s > rep.spike_lo ? Subinterval::spike : Subinterval::flat;
  return rep;
}

enum class Scenario { log_subopt, poly_subopt };

inline Scenario parse_scenario(std::string_view name) {
  if (name == "log_subopt") return Scenario::log_subopt;
  if (name == "poly_subopt") return Scenario::poly_subopt;
  throw Error(ErrorKind::invalid_parameter, "unknown scenario '" + std::string(name) + "'");
}

struct ScalingRow {
  double n = 0.0;
  double d = 0.0;
  double p = 0.0;
  double minimax = 0.0;
  double mle_risk = 0.0;

  double ratio() const { return mle_risk / minimax; }
};

/// Predicted n-sample rates for the two growth scenarios with r = tau = 1, p = 1 + delta.
inline ScalingRow example_scalings(Scenario scenario, double n, double delta = 0.5) {
  require(delta > 0.0 && delta < 1.0, ErrorKind::invalid_parameter, "delta must lie in (0, 1)");
  ScalingRow row;
  row.n = n;
  row.p = 1.0 + delta;
  if (scenario == Scenario::log_subopt) {
    require(n > M_E, ErrorKind::invalid_parameter, "log scenario needs n > e");
    const double log_n = std::log(n);
    row.d = std::pow(n, row.p / 2.0) * log_n;
    row.minimax = std::sqrt(std::pow(std::log(log_n) / n, 1.0 - delta));
    row.mle_risk = std::pow(log_n, delta / (1.0 + delta)) / std::pow(n, (1.0 - delta) / 2.0);
  } else {
    require(n >= 1.0, ErrorKind::invalid_parameter, "n must be >= 1");
    row.d = std::exp(std::sqrt(n));
    row.minimax = std::pow(n, -(1.0 - delta) / 4.0);
    row.mle_risk = 1.0;
  }
  return row;
}

}  // namespace lpseq
