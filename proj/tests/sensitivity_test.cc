#include <gtest/gtest.h>

#include <cmath>

#include "dpop/noise.h"
#include "dpop/objectives.h"
#include "dpop/sensitivity.h"
#include "test_util.h"

namespace dpop {
namespace {

using testing::UniformBallData;

FunctionClassSpec Spec(double L, double mu, double R, int n, bool erm) {
  FunctionClassSpec s;
  s.L = L;
  s.mu = mu;
  s.R = R;
  s.n = n;
  s.erm = erm;
  return s;
}

TEST(ClassSensitivityTest, KnownValues) {
  EXPECT_DOUBLE_EQ(ClassSensitivity(Spec(1.0, 0.5, 1.0, 1, false)).value, 4.0);
  EXPECT_DOUBLE_EQ(ClassSensitivity(Spec(1.0, 0.5, 1.0, 100, true)).value,
                   0.04);
  EXPECT_THROW(ClassSensitivity(Spec(1.0, 0.0, 1.0, 1, false)),
               UnsupportedError);
}

TEST(RegularizedSensitivityTest, KnownValues) {
  EXPECT_DOUBLE_EQ(
      RegularizedSensitivity(Spec(1.0, 0.0, 1.0, 1, false), 1.0).value, 4.0);
  EXPECT_DOUBLE_EQ(
      RegularizedSensitivity(Spec(1.0, 0.0, 1.0, 10, true), 1.0).value, 0.4);
  EXPECT_NEAR(RegularizedSensitivity(Spec(1.0, 0.0, 3.0, 1, false), 1e12).value,
              6.0, 1e-9);
  EXPECT_THROW(RegularizedSensitivity(Spec(1.0, 0.0, 1.0, 1, false), 0.0),
               InvalidArgumentError);
}

TEST(TermSensitivityTest, KnownValues) {
  const FunctionClassSpec s = Spec(1.0, 1.0, 1.0, 8, false);
  EXPECT_NEAR(TermSensitivity(s, 1.0, 0.0, 1.0).value, 2.0 * std::exp(1.0) / 8,
              1e-12);
  EXPECT_NEAR(TermSensitivity(s, 1.0, 0.0, 1.0).value, 0.6796, 1e-4);
  EXPECT_NEAR(TermSensitivity(s, 1e-12, 0.0, 1.0).value, 2.0 / 8, 1e-10);
  EXPECT_DOUBLE_EQ(TermSensitivity(s, 10.0, 0.0, 1.0).value, 2.0);
}

TEST(InflationTest, KnownValues) {
  const SensitivityBound one{1.0, SensitivityKind::kClassUpperBound, "b"};
  EXPECT_NEAR(InflateForApproximateMinimizer(one, 0.5, 1.0).value, 3.0, 1e-15);
  const SensitivityBound small{0.04, SensitivityKind::kClassUpperBound, "b"};
  EXPECT_NEAR(InflateForApproximateMinimizer(small, 1e-4, 0.5).value, 0.08,
              1e-15);
  EXPECT_DOUBLE_EQ(InflateForApproximateMinimizer(small, 0.0, 0.5).value, 0.04);
}

TEST(SensitivityProperty, Monotonicity) {
  const FunctionClassSpec s = Spec(1.0, 1.0, 2.0, 50, true);
  double previous = 0.0;
  for (double tau = 0.01; tau < 10.0; tau *= 1.5) {
    const double value = TermSensitivity(s, tau, -1.0, 2.0).value;
    EXPECT_GE(value, previous);
    previous = value;
  }
  previous = INFINITY;
  for (double lambda = 0.01; lambda < 100.0; lambda *= 1.5) {
    const double value = RegularizedSensitivity(s, lambda).value;
    EXPECT_LE(value, previous);
    previous = value;
  }
}

TEST(SensitivityProperty, AppendixFEmpiricalBelowBound) {
  Rng rng = MakeRng(31);
  const int n = 20;
  const AppendixF obj(3, 1.5, 2.0);
  const double bound = ClassSensitivity(obj.Spec(n)).value;
  for (int pair = 0; pair < 200; ++pair) {
    const Dataset x = UniformBallData(n, 3, 1.0, rng);
    const Vector repl = UniformBallData(1, 3, 1.0, rng).record(0);
    const Dataset y = AdjacentDataset(x, pair % n, repl);
    ASSERT_EQ(CountDifferingRecords(x, y), 1);
    EXPECT_LE((obj.ExactMinimizer(x) - obj.ExactMinimizer(y)).norm(),
              bound + 1e-9);
  }
}

TEST(SensitivityProperty, AppendixFTightnessWitness) {
  const int n = 10;
  const double mu = 1.5;
  const double L = 2.0;
  const AppendixF obj(3, mu, L);
  Dataset x;
  x.points = Matrix::Zero(n, 3);
  x.points(n - 1, 0) = 1.0;
  Vector minus_e1 = Vector::Zero(3);
  minus_e1(0) = -1.0;
  const Dataset y = AdjacentDataset(x, n - 1, minus_e1);
  EXPECT_NEAR((obj.ExactMinimizer(x) - obj.ExactMinimizer(y)).norm(),
              L / (mu * n), 1e-9);
}

TEST(SensitivityProperty, QuadraticMeanRefinement) {
  Rng rng = MakeRng(32);
  const int n = 25;
  const double R = 1.5;
  const double kappa = 9.0;
  const QuadraticMean obj = QuadraticMean::WithCondition(4, 1.0, kappa, R, rng);
  const double refined = QuadraticMeanSensitivity(R, obj.kappa(), n).value;
  EXPECT_NEAR(refined, 2.0 * R * 3.0 / n, 1e-9);
  const double bound = ClassSensitivity(obj.Spec(n)).value;
  for (int pair = 0; pair < 200; ++pair) {
    const Dataset x = UniformBallData(n, 4, R, rng);
    const Vector repl = UniformBallData(1, 4, R, rng).record(0);
    const Dataset y = AdjacentDataset(x, pair % n, repl);
    const double gap = (obj.ExactMinimizer(x) - obj.ExactMinimizer(y)).norm();
    EXPECT_LE(gap, refined + 1e-9);
    EXPECT_LE(gap, bound + 1e-9);
  }
}

}  // namespace
}  // namespace dpop
