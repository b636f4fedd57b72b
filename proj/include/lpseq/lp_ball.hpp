#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "lpseq/errors.hpp"
#include "lpseq/norms.hpp"

namespace lpseq {

/// The constraint set r * B^d_p, or the s-sparse vectors B^d_0(s) when p = 0.
struct LpBall {
  double p = 2.0;
  double radius = 1.0;       // meaningful for p > 0
  std::size_t sparsity = 0;  // meaningful for p = 0
  std::size_t dim = 1;

  static LpBall norm_ball(double p, double radius, std::size_t dim) {
    LpBall b{p, radius, 0, dim};
    b.validate();
    return b;
  }

  static LpBall sparse(std::size_t s, std::size_t dim) {
    LpBall b{0.0, 1.0, s, dim};
    b.validate();
    return b;
  }

  bool is_sparse() const { return p == 0.0; }
  bool is_box() const { return std::isinf(p); }
  bool is_convex() const { return p >= 1.0; }

  /// Hölder conjugate; meaningful for p >= 1.
  double conjugate() const { return conjugate_index(p); }

  void validate() const {
    require(dim >= 1, ErrorKind::invalid_parameter, "ball dimension must be >= 1");
    require(!std::isnan(p) && p >= 0.0, ErrorKind::invalid_parameter, "norm index p must be in [0, inf]");
    if (is_sparse()) {
      require(sparsity >= 1 && sparsity <= dim, ErrorKind::invalid_parameter,
              "sparsity must lie in {1..d}");
    } else {
      require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_parameter,
              "radius must be finite and > 0");
    }
  }

  /// Membership with a relative slack on the norm.
  bool contains(std::span<const double> x, double rel_tol = 1e-9) const {
    if (is_sparse()) return lp_pow_sum(x, 0.0) <= static_cast<double>(sparsity);
    return lp_norm(x, p) <= radius * (1.0 + rel_tol);
  }
};

inline std::string describe(const LpBall& ball) {
  if (ball.is_sparse()) return "B_0(s=" + std::to_string(ball.sparsity) + ")";
  const std::string p = ball.is_box() ? std::string("inf") : std::to_string(ball.p);
  return std::to_string(ball.radius) + "*B_" + p;
}

}  // namespace lpseq
