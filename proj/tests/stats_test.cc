#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dpop/core.h"
#include "dpop/stats.h"

namespace dpop {
namespace {

TEST(SummaryTest, KnownSample) {
  const Summary s = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(s.count, 4);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_NEAR(s.ci99_upper - s.mean, kZ99 * s.std / 2.0, 1e-15);
  EXPECT_NEAR(s.mean - s.ci99_lower, kZ99 * s.std / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(Median({5.0, 1.0, 3.0}), 3.0);
  EXPECT_THROW(Mean({}), InvalidArgumentError);
}

TEST(GammaCdfTest, IntegerShapeClosedForm) {
  for (double x : {0.1, 1.0, 2.5, 7.0}) {
    EXPECT_NEAR(GammaCdf(2.0, 1.0, x), 1.0 - std::exp(-x) * (1.0 + x), 1e-14);
    EXPECT_NEAR(GammaCdf(1.0, 0.5, x), 1.0 - std::exp(-2.0 * x), 1e-14);
  }
}

TEST(KsTestTest, UniformSample) {
  Rng rng = MakeRng(131);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> samples(20000);
  for (double& s : samples) s = unit(rng);
  auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_GT(KsTest(samples, uniform_cdf).p_value, 1e-3);
  for (double& s : samples) s = s * s;
  EXPECT_LT(KsTest(samples, uniform_cdf).p_value, 1e-6);
}

TEST(ChiSquareTestTest, DetectsMismatch) {
  const std::vector<double> probs = {0.2, 0.3, 0.5};
  const TestResult exact = ChiSquareTest({200, 300, 500}, probs);
  EXPECT_DOUBLE_EQ(exact.statistic, 0.0);
  EXPECT_NEAR(exact.p_value, 1.0, 1e-12);
  // Statistic 2 with 2 degrees of freedom has p-value exp(-1).
  const TestResult off = ChiSquareTest({220, 300, 480}, probs);
  EXPECT_NEAR(off.statistic, 400.0 / 200 + 0.0 + 400.0 / 500, 1e-12);
  EXPECT_NEAR(ChiSquareTest({180, 330, 490}, probs).p_value,
              std::exp(-(400.0 / 200 + 900.0 / 300 + 100.0 / 500) / 2.0),
              1e-12);
}

TEST(LogLogSlopeTest, PowerLaw) {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 / (v * v));
  EXPECT_NEAR(LogLogSlope(x, y), -2.0, 1e-12);
}

}  // namespace
}  // namespace dpop
