#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpseq/errors.hpp"
#include "lpseq/lp_ball.hpp"
#include "lpseq/lp_projection.hpp"
#include "lpseq/scalar_shrinkage.hpp"

namespace lpseq {

enum class EstimatorKind { mle, soft_threshold, zero, identity };

constexpr std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::soft_threshold: return "st";
    case EstimatorKind::zero: return "zero";
    case EstimatorKind::identity: return "identity";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "mle") return EstimatorKind::mle;
  if (name == "st" || name == "soft_threshold") return EstimatorKind::soft_threshold;
  if (name == "zero") return EstimatorKind::zero;
  if (name == "identity") return EstimatorKind::identity;
  throw Error(ErrorKind::invalid_parameter, "unknown estimator '" + std::string(name) + "'");
}

/// Which logarithm the soft-threshold level uses.
enum class ThresholdRule {
  with_e,  // sqrt(2 sigma^2 log(e d sigma^p)), the default
  plain,   // sqrt(2 sigma^2 log(d sigma^p))
};

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::mle;
  LpBall ball;          // used by mle; ball.p also feeds the threshold rule
  double sigma = 1.0;   // used by soft_threshold
  ThresholdRule rule = ThresholdRule::with_e;
  ProjectionOptions projection;
};

/// sqrt(2 sigma^2 log(c d sigma^p)) with c = e (default) or 1; zero when the
/// log argument is below 1.
inline double st_lambda(double sigma, std::size_t d, double p, ThresholdRule rule = ThresholdRule::with_e) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_parameter, "sigma must be > 0");
  require(d >= 1, ErrorKind::invalid_parameter, "dimension must be >= 1");
  require(p > 0.0 && p < 2.0, ErrorKind::invalid_parameter, "threshold rule needs p in (0, 2)");
  const double log_arg = (rule == ThresholdRule::with_e ? 1.0 : 0.0) + std::log(static_cast<double>(d)) +
                         p * std::log(sigma);
  if (log_arg <= 0.0) return 0.0;
  return sigma * std::sqrt(2.0 * log_arg);
}

inline Vector estimate(const EstimatorSpec& spec, std::span<const double> y) {
  for (double v : y) require(std::isfinite(v), ErrorKind::non_finite_input, "observation has a non-finite entry");
  switch (spec.kind) {
    case EstimatorKind::mle:
      return project(spec.ball, y, spec.projection).point;
    case EstimatorKind::soft_threshold: {
      const double lambda = st_lambda(spec.sigma, y.size(), spec.ball.p, spec.rule);
      Vector out(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = soft_threshold_scalar(y[i], lambda);
      return out;
    }
    case EstimatorKind::zero:
      return Vector(y.size(), 0.0);
    case EstimatorKind::identity:
      return Vector(y.begin(), y.end());
  }
  throw Error(ErrorKind::invalid_parameter, "unknown estimator kind");
}

/// Sample mean of n observations and the matching noise rescaling tau -> tau / sqrt(n).
struct SampleReduction {
  Vector mean;
  std::size_t n = 1;

  double effective_noise(double tau) const { return tau / std::sqrt(static_cast<double>(n)); }
};

inline SampleReduction reduce_samples(const std::vector<Vector>& samples) {
  require(!samples.empty(), ErrorKind::empty_input, "need at least one sample");
  const std::size_t d = samples.front().size();
  SampleReduction out;
  out.n = samples.size();
  out.mean.assign(d, 0.0);
  for (const auto& y : samples) {
    require(y.size() == d, ErrorKind::ragged_input, "samples differ in length");
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += y[i];
  }
  for (double& v : out.mean) v /= static_cast<double>(out.n);
  return out;
}

}  // namespace lpseq
