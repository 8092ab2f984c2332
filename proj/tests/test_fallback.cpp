#include "rbfshape/baselines.hpp"
#include "rbfshape/errors.hpp"
#include "rbfshape/fallback.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace rbfshape;
using rbfshape::gen::random_cloud;

namespace {

FallbackConfig with_theta(double theta) {
  FallbackConfig c;
  c.theta = theta;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rbfshape_test_" + name);
}

}  // namespace

TEST(FallbackConfig, ThetaAndValidation) {
  EXPECT_EQ(FallbackConfig::theta_from_log(12.0), 1e12);
  EXPECT_TRUE(std::isinf(FallbackConfig::theta_from_log(std::numeric_limits<double>::infinity())));
  EXPECT_THROW(with_theta(0.0).validate(), InvalidArgument);
  FallbackConfig c;
  c.max_trials = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = FallbackConfig{};
  c.init = InitPolicy::Fixed;
  c.fixed_init = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(ConditionOrInf, SingularIsInfinite) {
  const PointCloud c = gen::equidistant(10);
  EXPECT_TRUE(std::isinf(condition_or_inf(c, 1e-9, KernelSpec{})));
  EXPECT_NEAR(condition_or_inf(c, 1e10, KernelSpec::gaussian()), 10.0, 1e-9);
}

TEST(ApplyFallback, InBandPredictionIsKept) {
  const PointCloud c = gen::equidistant(10);
  const FallbackConfig cfg = with_theta(1e12);
  const OptimizeResult r = optimize_shape(c, cfg.kernel, cfg.band, hardy_shape(c));
  ASSERT_TRUE(r.converged);
  const FallbackOutcome o = apply_fallback(c, r.eps, cfg);
  EXPECT_FALSE(o.corrected);
  EXPECT_EQ(o.source, EpsSource::Nn);
  EXPECT_EQ(o.eps, r.eps);
  EXPECT_EQ(o.nn_eps, r.eps);
  EXPECT_LE(o.achieved_cond, 1e12);
}

TEST(ApplyFallback, InfiniteThetaKeepsAnyNonSingularPrediction) {
  const PointCloud c = gen::equidistant(10);
  const FallbackConfig cfg;
  for (double eps : {0.5, 2.0, 50.0, 1e4}) {
    const FallbackOutcome o = apply_fallback(c, eps, cfg);
    EXPECT_FALSE(o.corrected) << eps;
    EXPECT_EQ(o.eps, eps);
  }
  const FallbackOutcome singular = apply_fallback(c, 1e-9, cfg);
  EXPECT_TRUE(singular.corrected);
  EXPECT_TRUE(std::isfinite(singular.achieved_cond));
}

TEST(ApplyFallback, AdversarialPredictionIsCorrected) {
  std::mt19937_64 rng(1);
  const PointCloud c = random_cloud(rng, 2, 10, 1e-3, 0.05);
  const FallbackConfig cfg = with_theta(1e12);
  const FallbackOutcome o = apply_fallback(c, 1.0, cfg);
  EXPECT_TRUE(o.corrected);
  EXPECT_EQ(o.source, EpsSource::Optimizer);
  EXPECT_EQ(o.nn_eps, 1.0);
  EXPECT_LE(condition_or_inf(c, o.eps, cfg.kernel), 1e12);
  EXPECT_EQ(condition_or_inf(c, o.eps, cfg.kernel), o.achieved_cond);
}

TEST(ApplyFallback, UnusablePredictionsFallBackToFixedInit) {
  const PointCloud c = gen::equidistant(10);
  for (double bad : {-1.0, 0.0, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::infinity()}) {
    const FallbackOutcome o = apply_fallback(c, bad, with_theta(1e12));
    EXPECT_TRUE(o.corrected);
    EXPECT_LE(o.achieved_cond, 1e12);
  }
  FallbackConfig fixed = with_theta(1e12);
  fixed.init = InitPolicy::Fixed;
  const FallbackOutcome o = apply_fallback(c, 0.01, fixed);
  EXPECT_TRUE(o.corrected);
  EXPECT_LE(o.achieved_cond, 1e12);
}

TEST(ApplyFallback, ThetaBelowBandShiftsTarget) {
  const PointCloud c = gen::equidistant(10);
  const FallbackOutcome o = apply_fallback(c, 0.01, with_theta(1e8));
  EXPECT_TRUE(o.corrected);
  EXPECT_LE(o.achieved_cond, 1e8);
}

TEST(ApplyFallback, UnreachableThresholdThrows) {
  const PointCloud c = gen::equidistant(10);
  FallbackConfig cfg = with_theta(1e12);
  cfg.optimizer.max_iters = 1;
  cfg.max_trials = 1;
  EXPECT_THROW(apply_fallback(c, 1e-3, cfg), GuaranteeViolationError);
}

TEST(FallbackProperty, GuaranteeAndThetaMonotoneSubsets) {
  std::mt19937_64 rng(2);
  const double thetas[] = {1e10, 1e12, 1e14, std::numeric_limits<double>::infinity()};
  int corrections = 0;
  for (int t = 0; t < 60; ++t) {
    const double scale = std::pow(10.0, -gen::uniform(rng, 0.0, 3.0));
    const PointCloud c = random_cloud(rng, 1 + t % 2, 10, scale, 0.01);
    const double predicted = gen::log_uniform(rng, 0.1, 100.0) / scale;
    bool prev_corrected = true;
    for (double theta : thetas) {
      bool corrected = true;
      try {
        const FallbackOutcome o = apply_fallback(c, predicted, with_theta(theta));
        EXPECT_LE(condition_or_inf(c, o.eps, KernelSpec{}), theta);
        corrected = o.corrected;
        if (!corrected) EXPECT_EQ(o.eps, predicted);
      } catch (const GuaranteeViolationError&) {
      }
      // A correction at a larger theta implies one at every smaller theta.
      if (corrected) EXPECT_TRUE(prev_corrected) << "t " << t << " theta " << theta;
      corrections += corrected;
      prev_corrected = corrected;
    }
  }
  EXPECT_GT(corrections, 0);
}

TEST(PredictShape, UsesModelOutput) {
  MlpModel m = MlpModel::initialized(MlpModel::standard_dims(), 3);
  for (auto& l : m.mutable_layers()) {
    l.weights.setZero();
    l.bias.setZero();
  }
  m.mutable_layers().back().bias(0) = 2.0;
  const PointCloud c = gen::equidistant(10);
  const FallbackOutcome o = predict_shape(m, c, FallbackConfig{});
  EXPECT_EQ(o.nn_eps, 2.0);
  EXPECT_EQ(o.eps, 2.0);
  EXPECT_FALSE(o.corrected);
}

TEST(MeanPairwiseDistance, HandValue) {
  const double xs[] = {0.0, 1.0, 3.0};
  EXPECT_DOUBLE_EQ(mean_pairwise_distance(PointCloud::from_1d(xs)), 2.0);
}

TEST(FallbackReport, RatesAndHistogram) {
  std::mt19937_64 rng(4);
  std::vector<PointCloud> clouds;
  std::vector<FallbackOutcome> none, all;
  for (int i = 0; i < 10; ++i) {
    clouds.push_back(random_cloud(rng, 1, 10, std::pow(10.0, -i / 3.0)));
    none.push_back(FallbackOutcome{});
    FallbackOutcome o;
    o.corrected = true;
    all.push_back(o);
  }
  std::vector<double> training;
  for (int i = 0; i < 30; ++i) training.push_back(gen::log_uniform(rng, 1e-3, 1.0));

  const FallbackReport r0 = fallback_report(clouds, none, training);
  EXPECT_EQ(r0.corrected, 0);
  EXPECT_EQ(r0.correction_rate, 0.0);

  const FallbackReport r1 = fallback_report(clouds, all, training, 8);
  EXPECT_EQ(r1.total, 10);
  EXPECT_EQ(r1.correction_rate, 1.0);
  ASSERT_EQ(r1.histogram.size(), 8u);
  int corrected = 0, train = 0;
  for (std::size_t b = 0; b < r1.histogram.size(); ++b) {
    corrected += r1.histogram[b].corrected;
    train += r1.histogram[b].training;
    EXPECT_LT(r1.histogram[b].lo, r1.histogram[b].hi);
    if (b > 0) EXPECT_NEAR(r1.histogram[b].lo, r1.histogram[b - 1].hi, 1e-12 * r1.histogram[b].lo);
  }
  EXPECT_EQ(corrected, 10);
  EXPECT_EQ(train, 30);

  EXPECT_THROW(fallback_report(clouds, std::span(all).first(3), training), InvalidArgument);

  const auto path = temp_file("hist.csv");
  write_histogram_csv(r1, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "bin_lo,bin_hi,corrected,training");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 8);
  std::filesystem::remove(path);
}
