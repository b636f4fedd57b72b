#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace lpseq {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Magnitudes below this are treated as exact zeros.
inline constexpr double kFlushToZero = 1e-300;

/// |x|^e computed as exp(e log|x|), with 0^e = 0 for e > 0.
///
/// Exponents near zero (p close to 1) stay accurate this way, which a plain
/// std::pow also gives but with less predictable handling of subnormals.
inline double abs_pow(double x, double e) {
  const double a = std::fabs(x);
  if (a < kFlushToZero) return e > 0.0 ? 0.0 : (e == 0.0 ? 1.0 : kInf);
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  return std::exp(e * std::log(a));
}

/// sum_i |x_i|^p for p in (0, inf); the support size for p = 0.
inline double lp_pow_sum(std::span<const double> x, double p) {
  if (p == 0.0) {
    return static_cast<double>(std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; }));
  }
  double s = 0.0;
  for (double v : x) s += abs_pow(v, p);
  return s;
}

/// ||x||_p for p in (0, inf]; the quasinorm formula for p < 1, the count for p = 0.
inline double lp_norm(std::span<const double> x, double p) {
  if (p == 0.0) return lp_pow_sum(x, 0.0);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
  }
  // Scale by the largest entry to avoid overflow/underflow of the power sum.
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += abs_pow(v / m, p);
  return m * std::pow(s, 1.0 / p);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

inline double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Hölder conjugate p/(p-1), with 1 <-> inf.
inline double conjugate_index(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

}  // namespace lpseq
