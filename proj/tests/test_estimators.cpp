#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lpseq/estimators.hpp"

using namespace lpseq;

namespace {

EstimatorSpec spec(EstimatorKind kind, const LpBall& ball, double sigma = 1.0) {
  EstimatorSpec s;
  s.kind = kind;
  s.ball = ball;
  s.sigma = sigma;
  return s;
}

}  // namespace

TEST(Estimate, TrivialEstimators) {
  const Vector y{1.5, -2.0, 0.25};
  const auto zero = spec(EstimatorKind::zero, LpBall::norm_ball(2.0, 1.0, 3));
  EXPECT_EQ(estimate(zero, y), Vector(3, 0.0));
  const auto id = spec(EstimatorKind::identity, LpBall::norm_ball(2.0, 1.0, 3));
  EXPECT_EQ(estimate(id, y), y);
}

TEST(Estimate, MleIsProjection) {
  const auto mle = spec(EstimatorKind::mle, LpBall::norm_ball(2.0, 1.0, 2));
  const Vector x = estimate(mle, Vector{3.0, 4.0});
  EXPECT_NEAR(x[0], 0.6, 1e-12);
  EXPECT_NEAR(x[1], 0.8, 1e-12);
}

TEST(Estimate, RejectsNonFiniteObservation) {
  const auto id = spec(EstimatorKind::identity, LpBall::norm_ball(2.0, 1.0, 2));
  try {
    estimate(id, Vector{1.0, INFINITY});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_finite_input);
  }
}

TEST(StLambda, Values) {
  EXPECT_NEAR(st_lambda(1.0, 1, 1.0), std::sqrt(2.0), 1e-15);
  // sqrt(2 * 0.01 * log(e * 100 * 0.1^1.5)), evaluated at 50 digits.
  EXPECT_NEAR(st_lambda(0.1, 100, 1.5), 0.207426736294867390559607, 1e-15);
  // e d sigma^p = 1 sits on the clamp.
  const double sigma = std::pow(M_E * 100.0, -1.0 / 1.5);
  EXPECT_NEAR(st_lambda(sigma, 100, 1.5), 0.0, 1e-6);
  EXPECT_EQ(st_lambda(0.5 * sigma, 100, 1.5), 0.0);
}

TEST(StLambda, PlainRuleDropsTheE) {
  EXPECT_NEAR(st_lambda(0.1, 100, 1.5, ThresholdRule::plain),
              0.1 * std::sqrt(2.0 * std::log(100.0 * std::pow(0.1, 1.5))), 1e-15);
  // d sigma^p < 1: no shrinkage under the plain rule.
  EXPECT_EQ(st_lambda(0.03, 100, 1.5, ThresholdRule::plain), 0.0);
  EXPECT_GT(st_lambda(0.03, 100, 1.5), 0.0);
}

TEST(StLambda, RejectsBadParameters) {
  EXPECT_THROW(st_lambda(0.0, 10, 1.5), Error);
  EXPECT_THROW(st_lambda(0.1, 0, 1.5), Error);
  EXPECT_THROW(st_lambda(0.1, 10, 2.0), Error);
  EXPECT_THROW(st_lambda(0.1, 10, 0.0), Error);
}

TEST(Estimate, MleFeasibleAndStShrinksSupport) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double p : {0.5, 1.0, 1.5}) {
    const std::size_t d = 40;
    const auto mle = spec(EstimatorKind::mle, LpBall::norm_ball(p, 1.5, d));
    const auto st = spec(EstimatorKind::soft_threshold, LpBall::norm_ball(p, 1.0, d), 0.3);
    for (int t = 0; t < 30; ++t) {
      Vector y(d);
      for (double& v : y) v = n(rng);
      for (std::size_t i = 0; i < d; i += 5) y[i] = 0.0;
      const Vector x = estimate(mle, y);
      ASSERT_LE(lp_norm(x, p), 1.5 * (1.0 + 1e-9));
      const Vector s = estimate(st, y);
      for (std::size_t i = 0; i < d; ++i) {
        if (y[i] == 0.0) {
          ASSERT_EQ(s[i], 0.0);
        }
        ASSERT_LE(std::fabs(s[i]), std::fabs(y[i]));
        ASSERT_GE(s[i] * y[i], 0.0);
      }
    }
  }
}

TEST(ParseEstimatorKind, RoundTrip) {
  for (auto k : {EstimatorKind::mle, EstimatorKind::soft_threshold, EstimatorKind::zero, EstimatorKind::identity}) {
    EXPECT_EQ(parse_estimator_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_estimator_kind("soft_threshold"), EstimatorKind::soft_threshold);
  EXPECT_THROW(parse_estimator_kind("lasso"), Error);
}

TEST(ReduceSamples, Examples) {
  const Vector y{1.0, -2.0, 3.0};
  const auto one = reduce_samples({y});
  EXPECT_EQ(one.mean, y);
  EXPECT_DOUBLE_EQ(one.effective_noise(0.7), 0.7);

  const auto four = reduce_samples({y, y, y, y});
  EXPECT_EQ(four.mean, y);
  EXPECT_DOUBLE_EQ(four.effective_noise(1.0), 0.5);

  const auto cancel = reduce_samples({y, Vector{-1.0, 2.0, -3.0}});
  EXPECT_EQ(cancel.mean, Vector(3, 0.0));
  EXPECT_NEAR(cancel.effective_noise(1.0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ReduceSamples, Errors) {
  try {
    reduce_samples({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_input);
  }
  try {
    reduce_samples({Vector{1.0, 2.0}, Vector{1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ragged_input);
  }
}

TEST(ReduceSamples, MeanThenProjectMinimizesSummedSquares) {
  // d = 1: argmin over theta in [-r, r] of sum_i (y_i - theta)^2 by a fine grid.
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n(0.0, 1.5);
  const double r = 0.8;
  for (std::size_t count : {2, 3}) {
    for (int t = 0; t < 50; ++t) {
      std::vector<Vector> samples(count, Vector(1));
      for (auto& s : samples) s[0] = n(rng);
      const auto red = reduce_samples(samples);
      const double mle = estimate(spec(EstimatorKind::mle, LpBall::norm_ball(1.5, r, 1)), red.mean)[0];
      double best = -r, best_v = INFINITY;
      const int grid = 160000;
      for (int i = 0; i <= grid; ++i) {
        const double theta = -r + 2.0 * r * i / grid;
        double v = 0.0;
        for (const auto& s : samples) v += (s[0] - theta) * (s[0] - theta);
        if (v < best_v) {
          best_v = v;
          best = theta;
        }
      }
      ASSERT_NEAR(mle, best, 1e-5);
    }
  }
}
