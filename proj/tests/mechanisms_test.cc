#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "dpop/mechanisms.h"
#include "test_util.h"

namespace dpop {
namespace {

using testing::UniformBallData;
using testing::UniformBallPoint;

FunctionClassSpec Spec(double L, double mu, double beta, double R, int n,
                       int d, bool erm) {
  FunctionClassSpec s;
  s.L = L;
  s.mu = mu;
  s.beta = beta;
  s.R = R;
  s.n = n;
  s.d = d;
  s.erm = erm;
  return s;
}

RouteQuery Query(const FunctionClassSpec& spec, double eps, double delta,
                 Route route) {
  RouteQuery q;
  q.spec = spec;
  q.privacy = PrivacyParams(eps, delta);
  q.route = route;
  return q;
}

TEST(RouteNameTest, RoundTrip) {
  for (Route r : {Route::kSC, Route::kSmoothSC, Route::kConvex,
                  Route::kSmoothConvex, Route::kTerm, Route::kAdversarial}) {
    EXPECT_EQ(ParseRoute(RouteName(r)), r);
  }
  EXPECT_THROW(ParseRoute("nonsmooth"), InvalidArgumentError);
}

TEST(SelectParamsTest, StronglyConvexPure) {
  const MechanismParams p =
      SelectParams(Query(Spec(1, 1, 0, 1, 1, 2, false), 8.0, 0.0, Route::kSC));
  EXPECT_DOUBLE_EQ(p.alpha, 0.25);
  EXPECT_EQ(p.T, 8);
  EXPECT_EQ(p.optimizer, OptimizerKind::kSubgradient);
  EXPECT_TRUE(p.project);
  EXPECT_DOUBLE_EQ(p.sensitivity.value, 2.0);
}

TEST(SelectParamsTest, ConvexErmLambda) {
  const MechanismParams p = SelectParams(
      Query(Spec(1, 0, 0, 1, 100, 1, true), 1.0, 0.0, Route::kConvex));
  EXPECT_NEAR(p.lambda, 1.0 / std::sqrt(101.0), 1e-15);
  EXPECT_NEAR(p.lambda, 0.0995, 1e-4);
  EXPECT_DOUBLE_EQ(p.mu_eff, p.lambda);
}

TEST(SelectParamsTest, ApproximateFactorLimit) {
  // delta near 1/2 gives c_delta near 0, so the factor tends to sqrt(eps).
  const PrivacyParams p(2.0, 0.5 - 1e-12);
  EXPECT_NEAR(p.DimensionRatio(4), 2.0 * std::sqrt(2.0) / 2.0, 1e-5);
}

TEST(SelectParamsTest, SmoothRoutesDoNotProject) {
  const FunctionClassSpec s = Spec(1, 1, 4, 1, 200, 2, true);
  EXPECT_FALSE(SelectParams(Query(s, 4.0, 0.0, Route::kSmoothSC)).project);
  EXPECT_FALSE(SelectParams(Query(s, 4.0, 0.0, Route::kSmoothConvex)).project);
  EXPECT_EQ(SelectParams(Query(s, 4.0, 0.0, Route::kSmoothSC)).optimizer,
            OptimizerKind::kAgd);
}

TEST(SelectParamsTest, RefusesOutsideRegime) {
  const RouteQuery q = Query(Spec(1, 1, 0, 1, 1, 4, false), 2.0, 0.0, Route::kSC);
  EXPECT_THROW(SelectParams(q), RegimeError);
  RouteQuery forced = q;
  forced.force = true;
  EXPECT_NO_THROW(SelectParams(forced));
}

TEST(SelectParamsTest, TermOverridesSensitivity) {
  RouteQuery q = Query(Spec(1, 1, 0, 1, 8, 1, false), 8.0, 0.0, Route::kTerm);
  q.c_tau = std::exp(1.0);
  const MechanismParams p = SelectParams(q);
  EXPECT_NEAR(p.sensitivity.value, 2.0 * std::exp(1.0) / 8, 1e-14);
  const MechanismConfig c = ConfigFromParams(p, q.spec, q.privacy);
  ASSERT_TRUE(c.sensitivity_override.has_value());
  EXPECT_DOUBLE_EQ(c.sensitivity_override->value, p.sensitivity.value);
}

TEST(TheoreticalBoundTest, KnownValues) {
  EXPECT_DOUBLE_EQ(TheoreticalBound(Spec(1, 1, 0, 0.5, 1, 2, false),
                                    PrivacyParams(4, 0), Route::kSC,
                                    BoundMode::kEmpirical),
                   0.5);
  EXPECT_DOUBLE_EQ(TheoreticalBound(Spec(1, 1, 0, 3.0, 1, 2, false),
                                    PrivacyParams(4, 0), Route::kSC,
                                    BoundMode::kEmpirical),
                   1.0);
  EXPECT_NEAR(TheoreticalBound(Spec(1, 1, 1, 1, 1, 1, false),
                               PrivacyParams(10, 0), Route::kSmoothSC,
                               BoundMode::kEmpirical),
              0.04, 1e-15);
  EXPECT_NEAR(TheoreticalBound(Spec(1, 1, 0, 1, 100, 1, true),
                               PrivacyParams(1, 0), Route::kSC,
                               BoundMode::kPopulation),
              0.04, 1e-15);
}

TEST(TheoreticalBoundTest, ForceReportsTrivialBound) {
  RouteQuery q = Query(Spec(2, 1, 0, 3, 1, 5, false), 1.0, 0.0, Route::kConvex);
  EXPECT_THROW(TheoreticalBound(q), RegimeError);
  q.force = true;
  EXPECT_DOUBLE_EQ(TheoreticalBound(q), 6.0);
}

TEST(TheoreticalBoundTest, RejectsIncompatibleClass) {
  EXPECT_THROW(TheoreticalBound(Query(Spec(1, 0, 0, 1, 1, 1, false), 4.0, 0.0,
                                      Route::kSC)),
               UnsupportedError);
  EXPECT_THROW(TheoreticalBound(Query(Spec(1, 1, 0, 1, 1, 1, false), 4.0, 0.0,
                                      Route::kSmoothSC)),
               UnsupportedError);
  RouteQuery pop = Query(Spec(1, 1, 0, 1, 10, 1, false), 4.0, 0.0, Route::kSC);
  pop.mode = BoundMode::kPopulation;
  EXPECT_THROW(TheoreticalBound(pop), UnsupportedError);
}

TEST(TheoreticalBoundProperty, NeverExceedsTrivial) {
  Rng rng = MakeRng(81);
  std::uniform_real_distribution<double> unit(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = unit(rng);
    const FunctionClassSpec s =
        Spec(unit(rng), mu, mu * (1.0 + unit(rng)), unit(rng), 50, 2, true);
    for (Route route : {Route::kSC, Route::kSmoothSC, Route::kConvex,
                        Route::kSmoothConvex}) {
      RouteQuery q = Query(s, 10.0 * unit(rng), 0.0, route);
      q.force = true;
      EXPECT_LE(TheoreticalBound(q), s.L * s.R);
    }
  }
}

TEST(ConceptualTest, LargeEpsilonRecoversMinimizer) {
  Rng data_rng = MakeRng(82);
  const AppendixF obj(2, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  Rng rng = MakeRng(83);
  const PrivateOutput out = ConceptualOutputPerturbation(
      obj, x, PrivacyParams(1e6, 0.0), true, rng);
  EXPECT_LE((out.w_private - obj.ExactMinimizer(x)).norm(), 1e-4);
  EXPECT_FALSE(out.pre_noise_point.has_value());
}

TEST(ConceptualTest, QuadraticExcessMatchesMoment) {
  Rng data_rng = MakeRng(84);
  const int d = 3;
  const int n = 10;
  const double beta = 2.0;
  const double eps = 2.0;
  const QuadraticMean obj(Matrix::Identity(d, d), beta, 1.0);
  const Dataset x = UniformBallData(n, d, 1.0, data_rng);
  const PreparedRelease prepared =
      PrepareConceptual(obj, x, PrivacyParams(eps, 0.0), false);
  const double sensitivity = 4.0 / n;
  EXPECT_NEAR(prepared.noise.sensitivity, sensitivity, 1e-15);
  const double f_star = obj.Value(prepared.center, x);
  const int trials = 10000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = MakeRng(85, t);
    total += obj.Value(Release(prepared, rng).w_private, x) - f_star;
  }
  const double expected =
      0.5 * beta * d * (d + 1) * sensitivity * sensitivity / (eps * eps);
  EXPECT_NEAR(total / trials, expected, 0.05 * expected);
}

TEST(ConceptualTest, ProjectionSaturates) {
  const double R = 0.01;
  const QuadraticMean obj(Matrix::Identity(2, 2), 1.0, R);
  Dataset x;
  x.points = Matrix::Zero(4, 2);
  for (int t = 0; t < 100; ++t) {
    Rng rng = MakeRng(86, t);
    const PrivateOutput out = ConceptualOutputPerturbation(
        obj, x, PrivacyParams(0.01, 0.0), true, rng);
    EXPECT_NEAR(out.w_private.norm(), R, 1e-15);
  }
}

TEST(ConceptualTest, AuditRetainsCenter) {
  Rng data_rng = MakeRng(87);
  const AppendixF obj(2, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  Rng rng = MakeRng(88);
  const PrivateOutput out = ConceptualOutputPerturbation(
      obj, x, PrivacyParams(1.0, 0.0), true, rng, std::nullopt, true);
  ASSERT_TRUE(out.pre_noise_point.has_value());
  EXPECT_TRUE(out.audit);
  EXPECT_LE((*out.pre_noise_point - obj.ExactMinimizer(x)).norm(), 1e-15);
}

TEST(RouteGatingTest, NonSmoothRequiresProjection) {
  Rng data_rng = MakeRng(89);
  auto abs = std::make_shared<AbsDeviation>(2, 1.0);
  const Regularized ridge(abs, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  EXPECT_THROW(PrepareConceptual(ridge, x, PrivacyParams(1.0, 0.0), false),
               InvalidArgumentError);
  MechanismConfig c;
  c.spec = abs->Spec(20);
  c.lambda = 0.5;
  c.alpha = 1e-3;
  c.T = 10;
  c.project_after_noise = false;
  Rng rng = MakeRng(90);
  EXPECT_THROW(PrepareRegularizedBlackbox(abs, x, c, rng),
               InvalidArgumentError);
}

TEST(BlackboxTest, ExactOptimizerMatchesConceptualScale) {
  Rng data_rng = MakeRng(91);
  const AppendixF obj(2, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  const PrivacyParams privacy(2.0, 0.0);
  MechanismConfig c;
  c.privacy = privacy;
  c.spec = obj.Spec(20);
  c.optimizer = OptimizerKind::kExact;
  c.alpha = 0.0;
  Rng rng = MakeRng(92);
  const PreparedRelease bb = PrepareBlackbox(obj, x, c, rng);
  const PreparedRelease reference = PrepareConceptual(obj, x, privacy, true);
  EXPECT_DOUBLE_EQ(bb.noise.scale, reference.noise.scale);
  EXPECT_LE((bb.center - reference.center).norm(), 1e-15);
}

TEST(BlackboxTest, InflatesSensitivity) {
  Rng data_rng = MakeRng(93);
  const AppendixF obj(2, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  const RouteQuery q =
      Query(obj.Spec(20), 4.0, 0.0, Route::kSC);
  const MechanismParams p = SelectParams(q);
  const MechanismConfig c = ConfigFromParams(p, q.spec, q.privacy);
  Rng rng = MakeRng(94);
  const PrivateOutput out = BlackboxOutputPerturbation(obj, x, c, rng);
  EXPECT_NEAR(out.sensitivity_used,
              p.sensitivity.value + 2.0 * std::sqrt(2.0 * p.alpha / q.spec.mu),
              1e-14);
  EXPECT_EQ(out.iterations, p.T);
  EXPECT_LE(out.w_private.norm(), q.spec.R + 1e-12);
}

TEST(BlackboxTest, LargeLambdaShrinksCenter) {
  Rng data_rng = MakeRng(95);
  auto abs = std::make_shared<AbsDeviation>(2, 1.0);
  const Dataset x = UniformBallData(20, 2, 1.0, data_rng);
  MechanismConfig c;
  c.spec = abs->Spec(20);
  c.lambda = 1e6;
  c.alpha = 1e-12;
  c.T = 1000;
  c.audit = true;
  Rng rng = MakeRng(96);
  const PrivateOutput out = RegularizedBlackbox(abs, x, c, rng);
  ASSERT_TRUE(out.pre_noise_point.has_value());
  EXPECT_LE(out.pre_noise_point->norm(), 1e-5);
}

TEST(MechanismProperty, CertificateSoundness) {
  Rng data_rng = MakeRng(97);
  const AppendixF obj(3, 1.0, 1.0);
  const Dataset x = UniformBallData(20, 3, 1.0, data_rng);
  for (double eps : {0.5, 1.0, 4.0}) {
    const RouteQuery q = Query(obj.Spec(20), eps, 0.0, Route::kSC);
    const MechanismParams p = SelectParams(q);
    Rng rng = MakeRng(98);
    const PrivateOutput out = BlackboxOutputPerturbation(
        obj, x, ConfigFromParams(p, q.spec, q.privacy), rng);
    std::vector<Vector> probes;
    for (int i = 0; i < 500; ++i) {
      probes.push_back(UniformBallPoint(3, 20.0 * out.noise.scale, rng));
    }
    EXPECT_LE(PrivacyRatioCheck(out.noise, out.sensitivity_used, probes),
              eps + 1e-12);
  }
}

TEST(MechanismProperty, SensitivityCoversAdjacentCenters) {
  Rng rng = MakeRng(99);
  const AppendixF obj(2, 1.0, 1.0);
  const PrivacyParams privacy(1.0, 0.0);
  for (int pair = 0; pair < 100; ++pair) {
    const Dataset x = UniformBallData(15, 2, 1.0, rng);
    const Dataset y =
        AdjacentDataset(x, pair % 15, UniformBallPoint(2, 1.0, rng));
    const PreparedRelease px = PrepareConceptual(obj, x, privacy, true);
    const PreparedRelease py = PrepareConceptual(obj, y, privacy, true);
    EXPECT_LE((px.center - py.center).norm(), px.noise.sensitivity + 1e-12);
  }
}

TEST(AdversarialBlackboxTest, ZeroRadiusMatchesPlainRoute) {
  Rng data_rng = MakeRng(100);
  const AdversarialObjective adv(2, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
  const Dataset x = UniformBallData(50, 2, 1.0, data_rng);
  const RouteQuery q = Query(adv.Spec(50), 4.0, 0.0, Route::kAdversarial);
  const MechanismParams p = SelectParams(q);
  const MechanismConfig c = ConfigFromParams(p, q.spec, q.privacy);
  Rng rng = MakeRng(101);
  const PreparedRelease prepared = PrepareAdversarialBlackbox(adv, x, c, rng);
  const ObjectivePtr plain = adv.Unperturbed();
  const Vector w_star = plain->ExactMinimizer(x);
  EXPECT_LE(prepared.gap, p.alpha);
  EXPECT_LE((prepared.center - w_star).norm(),
            std::sqrt(2.0 * p.alpha / q.spec.mu) + 1e-12);
  const RouteQuery plain_q = Query(plain->Spec(50), 4.0, 0.0, Route::kSmoothSC);
  const MechanismParams plain_p = SelectParams(plain_q);
  EXPECT_DOUBLE_EQ(plain_p.alpha, p.alpha);
  EXPECT_DOUBLE_EQ(
      prepared.noise.scale,
      CalibrateNoise(plain_q.privacy,
                     InflateForApproximateMinimizer(plain_p.sensitivity,
                                                    plain_p.alpha, 1.0)
                         .value,
                     2)
          .scale);
}

TEST(OptimizerDispatchTest, Defaults) {
  EXPECT_EQ(DefaultOptimizer(Route::kSC), OptimizerKind::kSubgradient);
  EXPECT_EQ(DefaultOptimizer(Route::kConvex), OptimizerKind::kSubgradient);
  EXPECT_EQ(DefaultOptimizer(Route::kSmoothConvex), OptimizerKind::kAgd);
  EXPECT_EQ(DefaultOptimizer(Route::kAdversarial),
            OptimizerKind::kExtragradient);
  EXPECT_FALSE(IsDeterministic(OptimizerKind::kKatyusha));
  EXPECT_TRUE(IsDeterministic(OptimizerKind::kAgd));
}

}  // namespace
}  // namespace dpop
