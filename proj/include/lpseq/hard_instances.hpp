#pragma once

// Signals on which the projection estimator has large risk: the single spike
// e_1 and a flat k-sparse vector on the unit sphere of l_p.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "lpseq/errors.hpp"
#include "lpseq/norms.hpp"

namespace lpseq {

inline Vector spike_instance(std::size_t d) {
  require(d >= 1, ErrorKind::invalid_parameter, "dimension must be >= 1");
  Vector e(d, 0.0);
  e[0] = 1.0;
  return e;
}

/// k^{-1/p} (1_k, 0_{d-k}), which has ||.||_p = 1.
inline Vector flat_instance(std::size_t d, std::size_t k, double p) {
  require(k >= 1 && k <= d, ErrorKind::invalid_parameter, "support size must lie in {1..d}");
  require(p > 0.0, ErrorKind::invalid_parameter, "norm index must be > 0");
  Vector theta(d, 0.0);
  const double level = std::pow(static_cast<double>(k), -1.0 / p);
  std::fill_n(theta.begin(), k, level);
  return theta;
}

/// 1/2 (3/20)^q with q the conjugate of p.
inline double default_delta(double p) { return 0.5 * std::pow(3.0 / 20.0, conjugate_index(p)); }

struct HardInstanceParams {
  double delta = 0.0;
  std::size_t m = 0;          // largest multiple of 4 not above d
  double lambda_lower = 0.0;  // (sigma m^{1/q} / 2) (delta / 4)^{1/q}
  double k_raw = 0.0;         // lambda_lower^{-p/(2-p)} before rounding and clamping
  std::size_t k = 1;
  bool clamped = false;       // k_raw fell outside [1, floor(d/2)]
  Vector theta_star;
};

inline void check_flat_range(double sigma, double p, std::size_t d) {
  require(p > 1.0 && p < 2.0, ErrorKind::invalid_parameter, "flat instance needs p in (1, 2)");
  require(d >= 4, ErrorKind::invalid_parameter, "flat instance needs d >= 4");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_parameter, "sigma must be > 0");
}

inline HardInstanceParams flat_sparse_instance(double sigma, double p, std::size_t d,
                                               std::optional<double> delta = std::nullopt) {
  check_flat_range(sigma, p, d);
  HardInstanceParams h;
  h.delta = delta.value_or(default_delta(p));
  require(h.delta > 0.0 && h.delta < 1.0, ErrorKind::invalid_parameter, "delta must lie in (0, 1)");
  const double q = conjugate_index(p);
  h.m = d - d % 4;
  h.lambda_lower = 0.5 * sigma * std::pow(static_cast<double>(h.m), 1.0 / q) * std::pow(h.delta / 4.0, 1.0 / q);
  h.k_raw = std::pow(h.lambda_lower, -p / (2.0 - p));
  const double cap = static_cast<double>(d / 2);
  const double k_ceil = std::ceil(h.k_raw);
  h.clamped = !(k_ceil >= 1.0 && k_ceil <= cap);
  h.k = static_cast<std::size_t>(std::clamp(k_ceil, 1.0, cap));
  h.theta_star = flat_instance(d, h.k, p);
  return h;
}

/// Order-level sparsity ceil(max((1/(sigma^q d))^{(p-1)/(2-p)}, 1)), capped at d.
inline std::size_t sparsity_scaling(double sigma, double p, std::size_t d) {
  check_flat_range(sigma, p, d);
  const double q = conjugate_index(p);
  const double base = 1.0 / (std::pow(sigma, q) * static_cast<double>(d));
  const double k = std::ceil(std::max(std::pow(base, (p - 1.0) / (2.0 - p)), 1.0));
  return static_cast<std::size_t>(std::min(k, static_cast<double>(d)));
}

/// How an experiment picks the support size of the flat instance.
enum class SparsityRule {
  order,  // sparsity_scaling clamped to [1, floor(d/2)]
  lemma,  // flat_sparse_instance's k
};

}  // namespace lpseq
