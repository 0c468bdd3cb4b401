#include <gtest/gtest.h>

#include <cmath>

#include "dpop/noise.h"
#include "dpop/stats.h"

namespace dpop {
namespace {

NoiseSpec GammaSpec(int d, double sensitivity, double eps) {
  return CalibrateNoise(PrivacyParams(eps, 0.0), sensitivity, d);
}

TEST(CDeltaTest, KnownValues) {
  EXPECT_NEAR(CDelta(1.0 / 9.0), 1.0481, 1e-4);
  EXPECT_NEAR(CDelta(1.0 / 9.0), std::sqrt(std::log(3.0)), 1e-12);
  EXPECT_NEAR(CDelta(1.0 / 16.0), 1.2548, 1e-4);
  EXPECT_NEAR(CDelta(0.5 - 1e-12), 0.0, 1e-5);
  EXPECT_THROW(CDelta(0.5), InvalidArgumentError);
  EXPECT_THROW(CDelta(0.0), InvalidArgumentError);
}

TEST(GaussianSigmaTest, KnownValues) {
  EXPECT_NEAR(GaussianSigma(PrivacyParams(2.0, 0.5 - 1e-12), 1.0), 0.5, 1e-5);
  const double c = std::sqrt(std::log(3.0));
  EXPECT_NEAR(GaussianSigma(PrivacyParams(1.0, 1.0 / 9.0), 1.0),
              (c + std::sqrt(c * c + 1.0)) / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(GaussianSigma(PrivacyParams(1.0, 1.0 / 9.0), 1.0), 1.7655,
              1e-4);
}

TEST(GaussianSigmaTest, LinearInSensitivity) {
  const PrivacyParams p(0.7, 0.01);
  EXPECT_NEAR(GaussianSigma(p, 2.0), 2.0 * GaussianSigma(p, 1.0), 1e-14);
}

TEST(GaussianSigmaProperty, NoLargerThanClassical) {
  for (double eps : {0.05, 0.1, 0.25, 0.5, 0.75, 1.0}) {
    for (double delta : {1e-10, 1e-8, 1e-5, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.49}) {
      EXPECT_LE(GaussianSigma(PrivacyParams(eps, delta), 1.0),
                ClassicalGaussianSigma(eps, delta, 1.0))
          << "eps=" << eps << " delta=" << delta;
    }
  }
}

TEST(CalibrateNoiseTest, SelectsLaw) {
  const NoiseSpec g = GammaSpec(3, 2.0, 4.0);
  EXPECT_EQ(g.kind, NoiseKind::kGammaNorm);
  EXPECT_DOUBLE_EQ(g.scale, 0.5);
  const NoiseSpec n = CalibrateNoise(PrivacyParams(1.0, 1.0 / 9.0), 1.0, 3);
  EXPECT_EQ(n.kind, NoiseKind::kGaussian);
  EXPECT_NEAR(n.scale, 1.7655, 1e-4);
  EXPECT_THROW(CalibrateNoise(PrivacyParams(1.0, 0.0), 0.0, 3),
               InvalidArgumentError);
}

TEST(SampleNoiseTest, GammaNormMeanNorm) {
  const NoiseSpec spec = GammaSpec(3, 1.0, 1.0);
  Rng rng = MakeRng(11);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += SampleNoise(spec, rng).norm();
  EXPECT_NEAR(sum / draws, 3.0, 0.02 * 3.0);
}

TEST(SampleNoiseTest, GammaNormSecondMoment) {
  const NoiseSpec spec = GammaSpec(2, 1.0, 1.0);
  Rng rng = MakeRng(12);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += SampleNoise(spec, rng).squaredNorm();
  EXPECT_NEAR(sum / draws, 6.0, 0.03 * 6.0);
}

TEST(SampleNoiseTest, GaussianSecondMoment) {
  NoiseSpec spec;
  spec.kind = NoiseKind::kGaussian;
  spec.d = 4;
  spec.scale = 0.5;
  Rng rng = MakeRng(13);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += SampleNoise(spec, rng).squaredNorm();
  EXPECT_NEAR(sum / draws, 1.0, 0.03);
}

TEST(SampleNoiseTest, FloatScalar) {
  const NoiseSpec spec = GammaSpec(3, 1.0, 2.0);
  Rng rng = MakeRng(14);
  const Eigen::VectorXf z = SampleNoise<float>(spec, rng);
  EXPECT_EQ(z.size(), 3);
  EXPECT_TRUE(z.allFinite());
}

TEST(SampleNoiseProperty, GammaNormPassesKs) {
  const NoiseSpec spec = GammaSpec(3, 2.0, 1.5);
  Rng rng = MakeRng(15);
  std::vector<double> norms(100000);
  for (double& r : norms) r = SampleNoise(spec, rng).norm();
  const TestResult ks = KsTest(
      norms, [&](double r) { return GammaCdf(3.0, spec.scale, r); });
  EXPECT_GT(ks.p_value, 1e-3);
}

TEST(SampleNoiseProperty, RotationalSymmetry) {
  const NoiseSpec spec = GammaSpec(3, 1.0, 1.0);
  Rng rng = MakeRng(16);
  const int draws = 100000;
  Vector mean = Vector::Zero(3);
  for (int i = 0; i < draws; ++i) mean += SampleNoise(spec, rng).normalized();
  mean /= draws;
  EXPECT_LE(mean.norm(), 4.0 / std::sqrt(static_cast<double>(draws)));
}

TEST(LogDensityTest, GammaNormDifference) {
  const NoiseSpec spec = GammaSpec(2, 2.0, 1.0);
  Vector t(2);
  t << 0.0, 4.0;
  EXPECT_NEAR(LogDensity(spec, Vector::Zero(2)) - LogDensity(spec, t), 2.0,
              1e-15);
}

TEST(LogDensityTest, GaussianDifference) {
  NoiseSpec spec;
  spec.kind = NoiseKind::kGaussian;
  spec.d = 2;
  spec.scale = 1.0;
  Vector t(2);
  t << 2.0, 0.0;
  EXPECT_NEAR(LogDensity(spec, t) - LogDensity(spec, Vector::Zero(2)), -2.0,
              1e-15);
}

TEST(LogDensityProperty, GammaNormScalesWithNorm) {
  const NoiseSpec spec = GammaSpec(3, 1.5, 2.5);
  Rng rng = MakeRng(17);
  for (int i = 0; i < 100; ++i) {
    const Vector t = SampleUnitSphere(3, rng) * (i * 0.1);
    EXPECT_NEAR(LogDensity(spec, Vector::Zero(3)) - LogDensity(spec, t),
                2.5 * t.norm() / 1.5, 1e-12);
  }
}

TEST(PrivacyRatioCheckTest, ZeroShift) {
  const NoiseSpec spec = GammaSpec(2, 1.0, 1.0);
  std::vector<Vector> probes;
  Rng rng = MakeRng(18);
  for (int i = 0; i < 100; ++i) probes.push_back(SampleUnitSphere(2, rng) * i);
  EXPECT_EQ(PrivacyRatioCheck(spec, 0.0, probes), 0.0);
}

TEST(PrivacyRatioCheckTest, FullShiftApproachesEpsilon) {
  const NoiseSpec spec = GammaSpec(1, 1.0, 3.0);
  std::vector<Vector> probes;
  for (int i = 0; i < 1000; ++i) {
    probes.push_back(Vector::Constant(1, -50.0 + 0.1 * i));
  }
  const double worst = PrivacyRatioCheck(spec, 1.0, probes);
  EXPECT_LE(worst, 3.0 + 1e-12);
  EXPECT_GT(worst, 3.0 - 1e-9);
}

TEST(PrivacyRatioCheckTest, HalfShift) {
  const NoiseSpec spec = GammaSpec(3, 2.0, 2.0);
  std::vector<Vector> probes;
  Rng rng = MakeRng(19);
  for (int i = 0; i < 1000; ++i) {
    probes.push_back(SampleUnitSphere(3, rng) * (0.01 * i));
  }
  EXPECT_LE(PrivacyRatioCheck(spec, 1.0, probes), 1.0 + 1e-12);
}

TEST(PrivacyRatioCheckTest, RejectsLargeShiftAndGaussian) {
  const NoiseSpec spec = GammaSpec(2, 1.0, 1.0);
  EXPECT_THROW(PrivacyRatioCheck(spec, 1.5, {}), InvalidArgumentError);
  const NoiseSpec gauss = CalibrateNoise(PrivacyParams(1.0, 0.1), 1.0, 2);
  EXPECT_THROW(PrivacyRatioCheck(gauss, 0.5, {}), UnsupportedError);
}

TEST(LogDensityProperty, PointwisePrivacyLoss) {
  const double eps = 1.7;
  const double sensitivity = 0.8;
  const NoiseSpec spec = GammaSpec(4, sensitivity, eps);
  Rng rng = MakeRng(20);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vector t = SampleUnitSphere(4, rng) * (5.0 * unit(rng));
    const Vector c1 = SampleUnitSphere(4, rng) * unit(rng);
    const Vector c2 = c1 + SampleUnitSphere(4, rng) * sensitivity * unit(rng);
    EXPECT_LE(LogDensity(spec, t - c1) - LogDensity(spec, t - c2),
              eps + 1e-12);
  }
}

}  // namespace
}  // namespace dpop
