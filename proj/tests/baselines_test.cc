#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpop/baselines.h"
#include "dpop/stats.h"
#include "test_util.h"

namespace dpop {
namespace {

using testing::UniformBallData;

Dataset ScalarData(double value) {
  Dataset x;
  x.points = Matrix::Constant(1, 1, value);
  return x;
}

TEST(GridTest, Validation) {
  EXPECT_THROW(ValidateGrid(GridSpec::Ball(3, 129, 1.0)), UnsupportedError);
  EXPECT_THROW(ValidateGrid(GridSpec::Ball(1, 32, 1.0)), InvalidArgumentError);
  EXPECT_NO_THROW(ValidateGrid(GridSpec::Ball(2, 64, 1.0)));
}

TEST(GridTest, PointsInsideBothBalls) {
  Vector center(2);
  center << 0.9, 0.0;
  const GridSpec grid = GridSpec::Localized(center, 0.3, 1.0, 65);
  const Matrix points = GridPoints(grid);
  ASSERT_GT(points.rows(), 0);
  for (int i = 0; i < points.rows(); ++i) {
    const Vector p = points.row(i).transpose();
    EXPECT_LE(p.norm(), 1.0 + 1e-11);
    EXPECT_LE((p - center).norm(), 0.3 + 1e-11);
  }
  EXPECT_DOUBLE_EQ(GridSpacing(grid), 0.6 / 64);
}

TEST(ExponentialMechanismTest, SymmetricAbsoluteValue) {
  const AbsDeviation obj(1, 1.0);
  const Dataset x = ScalarData(0.0);
  const GridSpec grid = GridSpec::Ball(1, 129, 1.0);
  const int draws = 100000;
  std::vector<double> samples(draws);
  for (int t = 0; t < draws; ++t) {
    Rng rng = MakeRng(111, t);
    samples[t] = ExponentialMechanism(obj, x, grid, 4.0, rng).w(0);
  }
  const Summary s = Summarize(samples);
  EXPECT_LE(std::abs(s.mean), 3.0 * s.std / std::sqrt(double(draws)));
}

TEST(ExponentialMechanismTest, ZeroTemperatureMode) {
  const AbsDeviation obj(1, 1.0);
  const Dataset x = ScalarData(0.0);
  const GridSpec grid = GridSpec::Ball(1, 129, 1.0);
  for (int t = 0; t < 100; ++t) {
    Rng rng = MakeRng(112, t);
    EXPECT_EQ(ExponentialMechanism(obj, x, grid, 1e6, rng).w(0), 0.0);
  }
}

TEST(ExponentialMechanismTest, LinearLossCategoricalLaw) {
  // F(w) = w on [-1, 1] with L = R = 1.
  const LinearQuadratic obj(1, 0.0, 1.0, 1.0);
  const Dataset x = ScalarData(1.0);
  const GridSpec grid = GridSpec::Ball(1, 129, 1.0);
  const double eps = 4.0;
  Rng rng = MakeRng(113);
  const ExpMechResult first = ExponentialMechanism(obj, x, grid, eps, rng);
  const Matrix& points = first.points;
  const Vector& p = first.probabilities;
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  for (int i = 1; i < points.rows(); ++i) {
    const double dw = points(i, 0) - points(i - 1, 0);
    EXPECT_NEAR(p(i) / p(i - 1), std::exp(-dw), 1e-12);
  }
  EXPECT_DOUBLE_EQ(first.discretization_error, 2.0 / 128);

  const int draws = 100000;
  std::vector<long long> counts(points.rows(), 0);
  for (int t = 0; t < draws; ++t) {
    Rng draw_rng = MakeRng(114, t);
    ++counts[ExponentialMechanism(obj, x, grid, eps, draw_rng).index];
  }
  std::vector<double> probs(p.data(), p.data() + p.size());
  EXPECT_GT(ChiSquareTest(counts, probs).p_value, 1e-3);
  // Lowest versus highest grid point: ratio exp(2).
  const double ratio = double(counts.front()) / double(counts.back());
  EXPECT_NEAR(ratio, std::exp(2.0), 0.2 * std::exp(2.0));
}

TEST(LocalizationTest, RadiusFormula) {
  EXPECT_DOUBLE_EQ(LocalizationRadius(1.0, 2, 4.0, 3.0), 1.5);
}

double CaptureRate(double xi, int d, int trials, std::uint64_t seed) {
  Rng data_rng = MakeRng(seed);
  const AppendixF obj(d, 1.0, 1.0);
  const Dataset x = UniformBallData(20, d, 1.0, data_rng);
  int captured = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = MakeRng(seed + 1, t);
    if (Localization(obj, x, 2.0, xi, rng).captured) ++captured;
  }
  return double(captured) / trials;
}

TEST(LocalizationTest, LargeXiAlwaysCaptures) {
  EXPECT_EQ(CaptureRate(20.0, 2, 10000, 115), 1.0);
}

TEST(LocalizationTest, CaptureAtNinetyPercentLevel) {
  const int d = 2;
  const int trials = 10000;
  const double rate = CaptureRate(std::log(d / 0.1), d, trials, 116);
  EXPECT_GE(rate, 0.9 - 3.0 * std::sqrt(0.09 / trials));
}

TEST(LocalizationProperty, CaptureTailBound) {
  const int d = 2;
  const int trials = 10000;
  for (double xi : {1.0, 2.0, 4.0}) {
    const double target = 1.0 - d * std::exp(-xi);
    const double rate = CaptureRate(xi, d, trials, 117);
    const double mc_std = std::sqrt(rate * (1.0 - rate) / trials);
    EXPECT_GE(rate, target - 3.0 * mc_std) << "xi=" << xi;
  }
}

TEST(ExpPlusLocalizationTest, EpsilonAccounting) {
  Rng data_rng = MakeRng(118);
  const AppendixF obj(1, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 1, 1.0, data_rng);
  Rng rng = MakeRng(119);
  const ExpLocResult r = ExpPlusLocalization(obj, x, 16.0, 129, rng, true);
  EXPECT_DOUBLE_EQ(r.epsilon_localization, 8.0);
  EXPECT_DOUBLE_EQ(r.epsilon_sampling, 8.0);
  EXPECT_DOUBLE_EQ(r.epsilon_total, 16.0);
  EXPECT_LE(r.sample.w.norm(), obj.Spec(20).R + 1e-12);
}

TEST(ExpPlusLocalizationTest, RegimeGate) {
  Rng data_rng = MakeRng(120);
  const AppendixF obj(1, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 1, 1.0, data_rng);
  Rng rng = MakeRng(121);
  EXPECT_FALSE(ExpLocRegimeHolds(obj.Spec(20), 16.0));
  EXPECT_THROW(ExpPlusLocalization(obj, x, 16.0, 129, rng), RegimeError);
  const AppendixF obj3(3, 1.0, 1.0);
  const Dataset x3 = UniformBallData(20, 3, 1.0, data_rng);
  EXPECT_THROW(ExpPlusLocalization(obj3, x3, 16.0, 129, rng, true),
               UnsupportedError);
}

TEST(ExpPlusLocalizationTest, HugeEpsilonNearMinimizer) {
  // The sampling temperature scales with the localized radius, so the draw
  // spreads over the localized ball; that ball shrinks like 1/eps.
  Rng data_rng = MakeRng(122);
  const AppendixF obj(2, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  const Vector w_star = obj.ExactMinimizer(x);
  for (int t = 0; t < 20; ++t) {
    Rng rng = MakeRng(123, t);
    const ExpLocResult r = ExpPlusLocalization(obj, x, 1e7, 129, rng, true);
    EXPECT_TRUE(r.localization.captured);
    EXPECT_LT(r.localization.radius, 1e-5);
    EXPECT_LE((r.sample.w - w_star).norm(), 2.0 * r.localization.radius);
  }
}

TEST(ExpPlusLocalizationTest, XiAndRiskScale) {
  FunctionClassSpec s;
  s.L = 1.0;
  s.mu = 2.0;
  s.R = 3.0;
  s.d = 1;
  EXPECT_NEAR(ExpLocXi(s, 4.0), std::log(96.0), 1e-14);
  EXPECT_NEAR(ExpLocRiskScale(s, 4.0), 0.5 / 16.0 * std::log(96.0), 1e-14);
  EXPECT_TRUE(ExpLocRegimeHolds(s, 4.0));
}

}  // namespace
}  // namespace dpop
