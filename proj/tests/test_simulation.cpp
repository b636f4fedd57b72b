#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lpseq/simulation.hpp"

using namespace lpseq;

namespace {

EstimatorSpec spec(EstimatorKind kind, const LpBall& ball, double sigma = 1.0) {
  EstimatorSpec s;
  s.kind = kind;
  s.ball = ball;
  s.sigma = sigma;
  return s;
}

ExperimentConfig small_config() {
  auto c = ExperimentConfig::for_regime(Regime::fig2a);
  c.d_grid = {100, 300, 1000};
  c.reps = 20;
  c.seed = 99;
  return c;
}

std::string to_csv(const ExperimentConfig& c, const std::vector<RiskEstimate>& rows) {
  std::ostringstream os;
  write_csv(os, c, rows);
  return os.str();
}

}  // namespace

TEST(SampleObservation, VanishingNoiseReturnsSignal) {
  const Vector theta{0.3, -1.0, 2.0};
  const Vector y = sample_observation(theta, 1e-12, {1, 2, 3, 0});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i], theta[i], 1e-10);
  EXPECT_THROW(sample_observation(theta, 0.0, {1, 2, 3, 0}), Error);
}

TEST(SampleObservation, UnbiasedAndCalibrated) {
  const std::size_t trials = 10000;
  const double sigma = 0.7;
  const Vector theta{1.0, -2.0};
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector y = sample_observation(theta, sigma, {5, 1, t, 0});
    const double e = y[0] - theta[0];
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / trials;
  const double var = sum_sq / trials - mean * mean;
  EXPECT_LT(std::fabs(mean), 4.0 * sigma / std::sqrt(static_cast<double>(trials)));
  EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.05);
}

TEST(SampleObservation, KeysAreDeterministicAndDistinct) {
  const Vector theta(4, 0.0);
  EXPECT_EQ(sample_observation(theta, 1.0, {1, 2, 3, 0}), sample_observation(theta, 1.0, {1, 2, 3, 0}));
  EXPECT_NE(sample_observation(theta, 1.0, {1, 2, 3, 0}), sample_observation(theta, 1.0, {1, 2, 4, 0}));
  EXPECT_NE(sample_observation(theta, 1.0, {1, 2, 3, 0}), sample_observation(theta, 1.0, {1, 3, 3, 0}));
  EXPECT_NE(sample_observation(theta, 1.0, {1, 2, 3, 0}), sample_observation(theta, 1.0, {2, 2, 3, 0}));
}

TEST(EstimateRisk, ZeroEstimatorAtSpikeIsExact) {
  const auto r = estimate_risk(spec(EstimatorKind::zero, LpBall::norm_ball(1.5, 1.0, 10)), spike_instance(10), 0.3, 50, 1);
  EXPECT_EQ(r.mse_mean, 1.0);
  EXPECT_EQ(r.mse_stderr, 0.0);
  EXPECT_EQ(r.reps, 50u);
}

TEST(EstimateRisk, IdentityMatchesChiSquareMean) {
  const std::size_t d = 50;
  const double sigma = 0.4;
  const auto r = estimate_risk(spec(EstimatorKind::identity, LpBall::norm_ball(1.5, 1.0, d)), Vector(d, 0.1), sigma,
                               2000, 3);
  EXPECT_NEAR(r.mse_mean, sigma * sigma * d, 4.0 * r.mse_stderr);
  EXPECT_GT(r.mse_stderr, 0.0);
}

TEST(EstimateRisk, ThreadCountDoesNotChangeResults) {
  const auto s = spec(EstimatorKind::mle, LpBall::norm_ball(1.5, 1.0, 200));
  const auto a = estimate_risk(s, spike_instance(200), 0.1, 40, 7, 200, 1);
  const auto b = estimate_risk(s, spike_instance(200), 0.1, 40, 7, 200, 3);
  EXPECT_EQ(a.mse_mean, b.mse_mean);
  EXPECT_EQ(a.mse_stderr, b.mse_stderr);
}

TEST(MeanAndStderr, Values) {
  const Vector v{1.0, 2.0, 3.0, 4.0};
  const auto [m, se] = mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(FitLogSlope, Examples) {
  std::vector<std::pair<double, double>> power, flat;
  for (double d : {100.0, 1000.0, 1e4, 1e5}) {
    power.emplace_back(d, std::pow(d, -0.5));
    flat.emplace_back(d, 0.3);
  }
  EXPECT_NEAR(fit_log_slope(power), -0.5, 1e-12);
  EXPECT_NEAR(fit_log_slope(flat), 0.0, 1e-15);
  const std::vector<std::pair<double, double>> one{{10.0, 1.0}};
  EXPECT_THROW(fit_log_slope(one), Error);
  const std::vector<std::pair<double, double>> same{{10.0, 1.0}, {10.0, 2.0}};
  EXPECT_THROW(fit_log_slope(same), Error);
  const std::vector<std::pair<double, double>> zero{{10.0, 0.0}, {20.0, 2.0}};
  EXPECT_THROW(fit_log_slope(zero), Error);
}

TEST(Grids, LogUniformAndStepped) {
  const auto g = log_grid(100, 10000, 20);
  EXPECT_EQ(g.size(), 20u);
  EXPECT_EQ(g.front(), 100u);
  EXPECT_EQ(g.back(), 10000u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  const auto s = stepped_grid(40, 100000);
  EXPECT_EQ(s.front(), 100u);
  EXPECT_EQ(s[1], 160u);  // floor(10^(2 + 8/39))
  EXPECT_LE(s.back(), 100000u);
  EXPECT_EQ(stepped_grid(40, 1000).back(), 661u);
}

TEST(ExperimentConfig, RegimeDefaultsAndValidation) {
  const auto a = ExperimentConfig::for_regime(Regime::fig2a);
  EXPECT_EQ(a.sigma_rule, SigmaRule::spike);
  EXPECT_NEAR(a.sigma_at(0, 10000), std::pow(1e4, 1.0 / 1.5 - 1.0), 1e-15);
  const auto b = ExperimentConfig::for_regime(Regime::fig2b);
  EXPECT_EQ(b.instance, InstanceKind::flat);
  EXPECT_DOUBLE_EQ(b.sigma_at(0, 10000), 0.01);

  auto bad = a;
  bad.d_grid = {100, 100};
  EXPECT_THROW(bad.validate(), Error);
  bad = a;
  bad.reps = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = b;
  bad.p = 2.5;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(ExperimentConfig, JsonRoundTripAndUnknownKeys) {
  auto c = small_config();
  c.estimators = {EstimatorKind::mle, EstimatorKind::zero};
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.d_grid, c.d_grid);
  EXPECT_EQ(back.reps, c.reps);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.estimators, c.estimators);
  EXPECT_EQ(back.regime, Regime::fig2a);
  EXPECT_THROW(config_from_json(nlohmann::json{{"reps", 3}, {"colour", "red"}}), Error);
  EXPECT_THROW(config_from_json(nlohmann::json{{"reps", "many"}}), Error);
  EXPECT_THROW(config_from_json(nlohmann::json{{"sigma_rule", "wide"}}), Error);
  const auto inf = config_from_json(nlohmann::json{{"p", "inf"}, {"estimators", nlohmann::json::array({"mle"})}, {"d_grid", nlohmann::json::array({10})}, {"sigma_rule", "explicit"}, {"sigmas", nlohmann::json::array({0.5})}});
  EXPECT_TRUE(std::isinf(inf.p));
}

TEST(MakeCell, FlatSupportRules) {
  auto c = ExperimentConfig::for_regime(Regime::fig2b);
  const auto order = make_cell(c, 0, 10000);
  EXPECT_EQ(order.support, sparsity_scaling(0.01, 1.5, 10000));
  EXPECT_NEAR(lp_norm(order.theta, 1.5), 1.0, 1e-12);
  c.sparsity_rule = SparsityRule::lemma;
  const auto lemma = make_cell(c, 0, 10000);
  EXPECT_EQ(lemma.support, flat_sparse_instance(0.01, 1.5, 10000).k);
  EXPECT_TRUE(lemma.clamped);
  c.radius = 2.0;
  EXPECT_NEAR(lp_norm(make_cell(c, 0, 10000).theta, 1.5), 2.0, 1e-12);
}

TEST(RunExperiment, SingleDeterministicZeroRow) {
  auto c = small_config();
  c.d_grid = {100};
  c.reps = 1;
  c.estimators = {EstimatorKind::zero};
  const auto res = run_experiment(c);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].mse_mean, 1.0);
  EXPECT_EQ(res.rows[0].mse_stderr, 0.0);
  EXPECT_TRUE(res.complete());
  EXPECT_EQ(res.anchor, 0.0);
}

TEST(RunExperiment, BitIdenticalCsvAcrossRunsAndThreads) {
  auto c = small_config();
  const std::string first = to_csv(c, run_experiment(c).rows);
  EXPECT_EQ(first, to_csv(c, run_experiment(c).rows));
  c.threads = 3;
  EXPECT_EQ(first, to_csv(c, run_experiment(c).rows));
}

TEST(RunExperiment, CellResultsIndependentOfGridAndOrder) {
  auto c = small_config();
  const auto full = run_experiment(c);
  auto single = c;
  single.d_grid = {300};
  const auto part = run_experiment(single);
  ASSERT_EQ(part.rows.size(), 2u);
  EXPECT_EQ(part.rows[0].mse_mean, full.rows[2].mse_mean);
  EXPECT_EQ(part.rows[1].mse_mean, full.rows[3].mse_mean);

  // Resuming from a cursor reproduces the tail of an uninterrupted run.
  const auto resumed = run_experiment(c, 1);
  ASSERT_EQ(resumed.rows.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(resumed.rows[i].mse_mean, full.rows[i + 2].mse_mean);
}

TEST(RunExperiment, ReferenceCurveAnchoredAtFirstMlePoint) {
  const auto c = small_config();
  const auto res = run_experiment(c);
  ASSERT_EQ(res.reference.size(), 3u);
  EXPECT_NEAR(res.reference[0].anchored, res.rows[0].mse_mean, 1e-12);
  for (const auto& ref : res.reference) {
    EXPECT_GT(ref.control, 0.0);
    EXPECT_NEAR(ref.anchored, ref.control * res.anchor, 1e-15);
  }
}

TEST(RunExperiment, MleAboveSoftThresholdOnSpike) {
  const auto res = run_experiment(small_config());
  const auto mle = series(res.rows, EstimatorKind::mle);
  const auto st = series(res.rows, EstimatorKind::soft_threshold);
  ASSERT_EQ(mle.size(), 3u);
  EXPECT_GT(mle.back().second, st.back().second);
}

TEST(RunExperiment, ExplicitSigmaListCompletes) {
  auto c = small_config();
  c.d_grid = {100, 200};
  c.sigma_rule = SigmaRule::explicit_list;
  c.sigmas = {0.1, 0.1};
  c.estimators = {EstimatorKind::identity};
  const auto ok = run_experiment(c);
  EXPECT_TRUE(ok.complete());
  EXPECT_EQ(ok.next_cell, 2u);
}

TEST(Csv, RoundTrip) {
  const auto c = small_config();
  const auto rows = run_experiment(c).rows;
  const std::string text = to_csv(c, rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  std::istringstream is(text);
  const auto back = read_csv_rows(is);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].mse_mean, rows[i].mse_mean);
    EXPECT_EQ(back[i].mse_stderr, rows[i].mse_stderr);
    EXPECT_EQ(back[i].sigma, rows[i].sigma);
    EXPECT_EQ(back[i].d, rows[i].d);
    EXPECT_EQ(back[i].estimator, rows[i].estimator);
  }
  std::istringstream bad("a,b\n");
  EXPECT_THROW(read_csv_rows(bad), Error);
  EXPECT_EQ(format_real(kInf), "inf");
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorKind::bracket_failure, "boom");
               }),
               Error);
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
