#include "dpop/verify.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "dpop/baselines.h"
#include "dpop/mechanisms.h"
#include "dpop/noise.h"
#include "dpop/objectives.h"
#include "dpop/optimizers.h"
#include "dpop/sensitivity.h"
#include "dpop/stats.h"

namespace dpop {
namespace {

// Accumulates named checks into one verdict.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) {
      passed_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void Note(const std::string& what) {
    notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool passed() const { return passed_; }
  std::string detail() const {
    if (passed_) return notes_;
    return "FAILED: " + failures_ + (notes_.empty() ? "" : " | " + notes_);
  }

 private:
  bool passed_ = true;
  std::string failures_;
  std::string notes_;
};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

Dataset UniformBallData(int n, int d, double radius, Rng& rng) {
  DataDistribution dist;
  dist.kind = DistributionKind::kUniformBall;
  dist.d = d;
  dist.radius = radius;
  return dist.Sample(n, rng);
}

ExperimentRow MakeRow(const std::string& route, const FunctionClassSpec& spec,
                      const PrivacyParams& privacy, double lambda,
                      double alpha, long long T, double bound,
                      const Summary& summary, std::uint64_t seed) {
  ExperimentRow row;
  row.route = route;
  row.eps = privacy.epsilon();
  row.delta = privacy.delta();
  row.n = spec.n;
  row.d = spec.d;
  row.L = spec.L;
  row.mu = spec.mu;
  row.beta = spec.beta;
  row.R = spec.R;
  row.lambda = lambda;
  row.alpha = alpha;
  row.T = T;
  row.seed = seed;
  row.theory_bound = bound;
  FillStatistics(row, summary);
  return row;
}

// Excess F(Release(p)) - f_star over trials.
Summary ExcessOfRelease(const PreparedRelease& p, const Objective& obj,
                        const Dataset& x, double f_star, int trials,
                        std::uint64_t seed) {
  return EstimateExcessRisk(
      [&](Rng& rng) { return Release(p, rng).w_private; }, obj, x, trials,
      seed, f_star);
}

// Criterion 1.
void NoiseMoments(std::uint64_t seed, Checks& c) {
  const int draws = 100000;
  const int d = 3;
  const NoiseSpec spec = CalibrateNoise(PrivacyParams(1.0, 0.0), 1.0, d);
  Rng rng = MakeRng(seed, 1);
  std::vector<double> norms(draws);
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double r = SampleNoise<double>(spec, rng).norm();
    norms[i] = r;
    m1 += r;
    m2 += r * r;
  }
  m1 /= draws;
  m2 /= draws;
  c.Expect(std::abs(m1 - 3.0) <= 0.02 * 3.0, "E|z| = " + Num(m1) + " vs 3");
  c.Expect(std::abs(m2 - 12.0) <= 0.03 * 12.0,
           "E|z|^2 = " + Num(m2) + " vs 12");
  const TestResult ks =
      KsTest(norms, [](double t) { return GammaCdf(3.0, 1.0, t); });
  c.Note("E|z|=" + Num(m1) + " E|z|^2=" + Num(m2) +
         " KS p=" + Num(ks.p_value));
}

// Criterion 2.
void GaussianMoments(std::uint64_t seed, Checks& c) {
  const int draws = 100000;
  const int d = 5;
  const double sens = 1.0;
  int stream = 2;
  for (auto [eps, delta] : {std::pair{1.0, 1.0 / 9.0}, std::pair{4.0, 0.05}}) {
    const PrivacyParams privacy(eps, delta);
    const NoiseSpec spec = CalibrateNoise(privacy, sens, d);
    // Oracle: sigma = (c + sqrt(c^2 + eps)) sens / (sqrt(2) eps).
    const double cd =
        std::sqrt(std::log(2.0 / (std::sqrt(16.0 * delta + 1.0) - 1.0)));
    const double sigma =
        (cd + std::sqrt(cd * cd + eps)) * sens / (std::sqrt(2.0) * eps);
    Rng rng = MakeRng(seed, stream++);
    double m2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      m2 += SampleNoise<double>(spec, rng).squaredNorm();
    }
    m2 /= draws;
    const double target = d * sigma * sigma;
    c.Expect(std::abs(spec.scale - sigma) <= 1e-12 * sigma,
             "sigma mismatch at eps=" + Num(eps));
    c.Expect(std::abs(m2 - target) <= 0.03 * target,
             "E|z|^2 = " + Num(m2) + " vs " + Num(target));
    c.Note("(" + Num(eps) + "," + Num(delta) + "): E|z|^2=" + Num(m2) +
           " target=" + Num(target));
  }
}

// Criterion 3.
void PureCertificate(Checks& c) {
  struct Case {
    int d;
    double sens;
    double eps;
  };
  for (const Case& k : {Case{1, 1.0, 1.0}, Case{3, 0.5, 2.0},
                        Case{3, 2.0, 0.25}}) {
    const NoiseSpec spec =
        CalibrateNoise(PrivacyParams(k.eps, 0.0), k.sens, k.d);
    std::vector<Vector> probes;
    if (k.d == 1) {
      for (int i = 0; i < 1000; ++i) {
        Vector t(1);
        t(0) = -5.0 * k.sens + 10.0 * k.sens * i / 999.0;
        probes.push_back(t);
      }
    } else {
      for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
          for (int l = 0; l < 10; ++l) {
            Vector t = Vector::Zero(k.d);
            t(0) = -2.0 * k.sens + 4.0 * k.sens * i / 9.0;
            t(1) = -2.0 * k.sens + 4.0 * k.sens * j / 9.0;
            t(2) = -2.0 * k.sens + 4.0 * k.sens * l / 9.0;
            probes.push_back(t);
          }
        }
      }
    }
    const double full = PrivacyRatioCheck(spec, k.sens, probes);
    const double half = PrivacyRatioCheck(spec, k.sens / 2.0, probes);
    c.Expect(full <= k.eps + 1e-9, "shift Delta ratio " + Num(full));
    c.Expect(half <= k.eps / 2.0 + 1e-9, "shift Delta/2 ratio " + Num(half));
    c.Note("d=" + std::to_string(k.d) + " eps=" + Num(k.eps) +
           ": max=" + Num(full) + " half=" + Num(half));
  }
}

// Criterion 4.
void SensitivityTightness(Checks& c) {
  for (int n : {2, 5, 40}) {
    const int d = 3;
    const double mu = 1.5;
    const double L = 2.0;
    const AppendixF obj(d, mu, L);
    Dataset x;
    x.points = Matrix::Zero(n, d);
    x.points(n - 1, 0) = 1.0;
    Vector minus_e1 = Vector::Zero(d);
    minus_e1(0) = -1.0;
    const Dataset xp = AdjacentDataset(x, n - 1, minus_e1);
    const double gap =
        (obj.ExactMinimizer(x) - obj.ExactMinimizer(xp)).norm();
    const double exact = L / (mu * n);
    const double class_bound = 2.0 * L / (mu * n);
    c.Expect(CountDifferingRecords(x, xp) == 1, "datasets not adjacent");
    c.Expect(std::abs(gap - exact) <= 1e-9,
             "gap " + Num(gap) + " vs " + Num(exact));
    c.Expect(gap <= class_bound, "gap exceeds 2L/(mu n)");
    c.Note("n=" + std::to_string(n) + " gap=" + Num(gap));
  }
}

// Criterion 5.
void ConceptualQuadratic(std::uint64_t seed, Checks& c,
                         std::vector<ExperimentRow>* rows) {
  const int n = 50;
  const double beta = 1.0;
  const double R = 1.0;
  const int trials = 10000;
  struct Case {
    int d;
    double eps;
    double delta;
  };
  int stream = 50;
  for (const Case& k : {Case{1, 1.0, 0.0}, Case{3, 4.0, 0.0},
                        Case{1, 1.0, 1.0 / 9.0}, Case{3, 4.0, 0.05}}) {
    const QuadraticMean obj(Matrix::Identity(k.d, k.d), beta, R);
    Rng data_rng = MakeRng(seed, stream++);
    const Dataset x = UniformBallData(n, k.d, R, data_rng);
    const PrivacyParams privacy(k.eps, k.delta);
    const PreparedRelease p = PrepareConceptual(obj, x, privacy, false);
    const double f_star = obj.Value(obj.ExactMinimizer(x), x);
    // Oracle: Delta = 2L/(mu n) with L = 2 beta R, mu = beta.
    const double sens = 4.0 * R / n;
    double expected;
    if (k.delta == 0.0) {
      expected = 0.5 * beta * k.d * (k.d + 1) * sens * sens / (k.eps * k.eps);
    } else {
      const double cd = std::sqrt(
          std::log(2.0 / (std::sqrt(16.0 * k.delta + 1.0) - 1.0)));
      const double sigma =
          (cd + std::sqrt(cd * cd + k.eps)) * sens / (std::sqrt(2.0) * k.eps);
      expected = 0.5 * beta * k.d * sigma * sigma;
    }
    const Summary s =
        ExcessOfRelease(p, obj, x, f_star, trials, MakeRng(seed, stream++)());
    c.Expect(std::abs(s.mean - expected) <= 0.05 * expected,
             "d=" + std::to_string(k.d) + " mean " + Num(s.mean) + " vs " +
                 Num(expected));
    c.Note("d=" + std::to_string(k.d) + " eps=" + Num(k.eps) +
           " delta=" + Num(k.delta) + ": " + Num(s.mean / expected));
    if (rows) {
      rows->push_back(MakeRow("smooth_sc", obj.Spec(n), privacy, 0.0, 0.0, 0,
                              expected, s, seed));
    }
  }
}

// Criterion 6.
void BlackboxSc(std::uint64_t seed, Checks& c,
                std::vector<ExperimentRow>* rows) {
  const int n = 100;
  const double R = 1.0;
  const int trials = 1000;
  struct Case {
    int d;
    double eps;
    double mu;
  };
  int stream = 60;
  for (const Case& k : {Case{1, 16.0, 4.0}, Case{2, 8.0, 1.0},
                        Case{3, 3.0, 1.0}, Case{5, 10.0, 2.0}}) {
    auto inner = std::make_shared<AbsDeviation>(k.d, R);
    const Regularized obj(inner, k.mu);
    Rng data_rng = MakeRng(seed, stream++);
    const Dataset x = UniformBallData(n, k.d, R, data_rng);
    FunctionClassSpec spec = obj.Spec(n);
    spec.erm = false;
    const PrivacyParams privacy(k.eps, 0.0);
    RouteQuery q;
    q.spec = spec;
    q.privacy = privacy;
    q.route = Route::kSC;
    q.impl = Implementation::kBlackbox;
    const MechanismParams params =
        SelectParams(q, OptimizerKind::kSubgradient);
    const double ratio = static_cast<double>(k.d) / k.eps;
    // Oracle: alpha = (L^2/mu)(d/eps), T = 2 eps / d.
    const double alpha = spec.L * spec.L / spec.mu * ratio;
    c.Expect(std::abs(params.alpha - alpha) <= 1e-12 * alpha, "alpha");
    c.Expect(params.T == static_cast<int>(std::ceil(2.0 / ratio - 1e-9)),
             "T = " + std::to_string(params.T));
    Rng prep = MakeRng(seed, stream++);
    const PreparedRelease p =
        PrepareBlackbox(obj, x, ConfigFromParams(params, spec, privacy), prep);
    const double f_star = obj.Value(obj.ExactMinimizer(x), x);
    const Summary s =
        ExcessOfRelease(p, obj, x, f_star, trials, MakeRng(seed, stream++)());
    const double bound = 9.0 * spec.L * spec.L / spec.mu * ratio;
    c.Expect(s.ci99_upper <= bound, "d=" + std::to_string(k.d) + " CI " +
                                        Num(s.ci99_upper) + " > " +
                                        Num(bound));
    c.Note("d=" + std::to_string(k.d) + " eps=" + Num(k.eps) +
           ": ratio " + Num(s.ci99_upper / bound));
    if (rows) {
      rows->push_back(MakeRow("sc", spec, privacy, 0.0, params.alpha,
                              params.T, bound, s, seed));
    }
  }
}

// Criterion 7.
void SmoothScErm(std::uint64_t seed, Checks& c,
                 std::vector<ExperimentRow>* rows) {
  const int n = 200;
  const int d = 5;
  const double R = 1.0;
  const int trials = 1000;
  int stream = 70;
  for (double kappa : {1.0, 10.0}) {
    Rng build = MakeRng(seed, stream++);
    const QuadraticMean obj =
        QuadraticMean::WithCondition(d, 1.0, kappa, R, build);
    DataDistribution dist;
    dist.kind = DistributionKind::kPreimageBall;
    dist.d = d;
    dist.radius = R;
    dist.transform = obj.m();
    const Dataset x = dist.Sample(n, build);
    const FunctionClassSpec spec = obj.Spec(n);
    for (double eps : {1.0, 4.0}) {
      const PrivacyParams privacy(eps, 0.0);
      RouteQuery q;
      q.spec = spec;
      q.privacy = privacy;
      q.route = Route::kSmoothSC;
      q.impl = Implementation::kBlackbox;
      const MechanismParams params = SelectParams(q, OptimizerKind::kAgd);
      const double ratio = d / eps;
      // Oracle: alpha = (L^2/(mu n^2)) min{kappa ratio^2, 1}.
      const double alpha = spec.L * spec.L / (spec.mu * n * n) *
                           std::min(spec.kappa() * ratio * ratio, 1.0);
      c.Expect(std::abs(params.alpha - alpha) <= 1e-12 * alpha, "alpha");
      c.Expect(!params.project, "smooth route must not project");
      Rng prep = MakeRng(seed, stream++);
      const PreparedRelease p = PrepareBlackbox(
          obj, x, ConfigFromParams(params, spec, privacy), prep);
      const double f_star = obj.Value(obj.ExactMinimizer(x), x);
      const Summary s = ExcessOfRelease(p, obj, x, f_star, trials,
                                        MakeRng(seed, stream++)());
      const double r = d / (eps * n);
      const double bound = 26.0 * spec.kappa() * spec.L * spec.L / spec.mu *
                           r * r;
      c.Expect(s.ci99_upper <= bound, "kappa=" + Num(kappa) + " eps=" +
                                          Num(eps) + " CI " +
                                          Num(s.ci99_upper) + " > " +
                                          Num(bound));
      c.Note("kappa=" + Num(kappa) + " eps=" + Num(eps) + ": ratio " +
             Num(s.ci99_upper / bound) + " T=" + std::to_string(params.T));
      if (rows) {
        rows->push_back(MakeRow("smooth_sc", spec, privacy, 0.0, params.alpha,
                                params.T, bound, s, seed));
      }
    }
  }
}

// Criterion 8.
void RegularizedConvex(std::uint64_t seed, Checks& c,
                       std::vector<ExperimentRow>* rows) {
  const int n = 400;
  const int d = 2;
  const double eps = 4.0;
  const double R = 1.0;
  const int trials = 1000;
  auto obj = std::make_shared<AbsDeviation>(d, R);
  Rng data_rng = MakeRng(seed, 80);
  const Dataset x = UniformBallData(n, d, R, data_rng);
  const FunctionClassSpec spec = obj->Spec(n);
  const PrivacyParams privacy(eps, 0.0);
  RouteQuery q;
  q.spec = spec;
  q.privacy = privacy;
  q.route = Route::kConvex;
  q.impl = Implementation::kBlackbox;
  const MechanismParams params = SelectParams(q, OptimizerKind::kSubgradient);
  const double r = d / (eps * n);
  // Oracle: lambda = L/(R sqrt(1 + 1/r)), alpha = LR r^{3/2}/(1 + d/eps)^2.
  const double lambda = spec.L / (R * std::sqrt(1.0 + 1.0 / r));
  const double alpha =
      spec.L * R * std::pow(r, 1.5) / std::pow(1.0 + d / eps, 2);
  c.Expect(std::abs(params.lambda - lambda) <= 1e-12 * lambda, "lambda");
  c.Expect(std::abs(params.alpha - alpha) <= 1e-12 * alpha, "alpha");
  Rng prep = MakeRng(seed, 81);
  const PreparedRelease p = PrepareRegularizedBlackbox(
      obj, x, ConfigFromParams(params, spec, privacy), prep);
  const double f_star = obj->Value(obj->ReferenceMinimizer(x), x);
  const Summary s =
      ExcessOfRelease(p, *obj, x, f_star, trials, MakeRng(seed, 82)());
  const double bound = 49.0 * spec.L * R * std::sqrt(r);
  c.Expect(s.ci99_upper <= bound,
           "CI " + Num(s.ci99_upper) + " > " + Num(bound));
  c.Note("ratio " + Num(s.ci99_upper / bound) +
         " T=" + std::to_string(params.T));
  if (rows) {
    rows->push_back(MakeRow("convex", spec, privacy, params.lambda,
                            params.alpha, params.T, bound, s, seed));
  }
}

// Criterion 9.
void SmoothConvex(std::uint64_t seed, Checks& c,
                  std::vector<ExperimentRow>* rows) {
  const int n = 400;
  const int d = 2;
  const double eps = 4.0;
  const double R = 1.0;
  const int trials = 1000;
  auto obj = std::make_shared<Logistic>(d, R, 1.0);
  Rng data_rng = MakeRng(seed, 90);
  DataDistribution dist;
  dist.kind = DistributionKind::kUniformBall;
  dist.d = d;
  dist.radius = 1.0;
  dist.label_w = SampleUnitSphere<double>(d, data_rng) * 2.0;
  const Dataset x = dist.Sample(n, data_rng);
  const FunctionClassSpec spec = obj->Spec(n);
  const PrivacyParams privacy(eps, 0.0);
  const double r = d / (eps * n);
  c.Expect(r * r <= spec.L / (spec.beta * R), "regime");
  RouteQuery q;
  q.spec = spec;
  q.privacy = privacy;
  q.route = Route::kSmoothConvex;
  q.impl = Implementation::kBlackbox;
  const MechanismParams params = SelectParams(q, OptimizerKind::kAgd);
  const double scale = std::cbrt(spec.beta) * std::cbrt(spec.L * spec.L) *
                       std::cbrt(std::pow(R, 4));
  // Oracle: lambda = (beta L^2 / R^2)^{1/3} r^{2/3}.
  const double lambda =
      std::cbrt(spec.beta * spec.L * spec.L / (R * R)) * std::pow(r, 2.0 / 3.0);
  c.Expect(std::abs(params.lambda - lambda) <= 1e-12 * lambda, "lambda");
  Rng prep = MakeRng(seed, 91);
  const PreparedRelease p = PrepareRegularizedBlackbox(
      obj, x, ConfigFromParams(params, spec, privacy), prep);
  const double f_star = obj->Value(ReferenceMinimizer(*obj, x), x);
  const Summary s =
      ExcessOfRelease(p, *obj, x, f_star, trials, MakeRng(seed, 92)());
  const double bound = 65.0 * scale * std::pow(r, 2.0 / 3.0);
  c.Expect(s.ci99_upper <= bound,
           "CI " + Num(s.ci99_upper) + " > " + Num(bound));
  c.Note("ratio " + Num(s.ci99_upper / bound) +
         " T=" + std::to_string(params.T));
  if (rows) {
    rows->push_back(MakeRow("smooth_convex", spec, privacy, params.lambda,
                            params.alpha, params.T, bound, s, seed));
  }
}

// Criterion 10.
void PopulationLoss(std::uint64_t seed, Checks& c,
                    std::vector<ExperimentRow>* rows) {
  const int d = 2;
  const double eps = 4.0;
  const double mu = 1.0;
  const double L = 1.0;
  const int trials = 500;
  const int holdout = 2000;
  const AppendixF obj(d, mu, L);
  DataDistribution dist;
  dist.kind = DistributionKind::kUniformSphere;
  dist.d = d;
  dist.radius = 1.0;
  // Population minimizer -(L/(2 mu)) E[x] = 0 by symmetry.
  const Vector w_pop = Vector::Zero(d);
  const PrivacyParams privacy(eps, 0.0);
  int stream = 100;
  for (int n : {50, 200}) {
    const FunctionClassSpec spec = obj.Spec(n);
    const double r = d / (eps * n);
    c.Expect(r <= 1.0, "regime");
    DatasetMechanism mech = [&](const Dataset& x, Rng& rng) {
      return ConceptualOutputPerturbation(obj, x, privacy, true, rng)
          .w_private;
    };
    const Summary s = EstimatePopulationLoss(mech, obj, dist, n, trials,
                                             holdout, w_pop,
                                             MakeRng(seed, stream++)());
    const double bound =
        2.0 * spec.L * spec.L / spec.mu * (1.0 / n + r);
    RouteQuery q;
    q.spec = spec;
    q.privacy = privacy;
    q.route = Route::kSC;
    q.mode = BoundMode::kPopulation;
    c.Expect(std::abs(TheoreticalBound(q) - std::min(spec.L * spec.R, bound)) <=
                 1e-12,
             "population bound formula");
    c.Expect(s.ci99_upper <= bound, "n=" + std::to_string(n) + " CI " +
                                        Num(s.ci99_upper) + " > " +
                                        Num(bound));
    c.Note("n=" + std::to_string(n) + ": ratio " +
           Num(s.ci99_upper / bound));
    if (rows) {
      rows->push_back(
          MakeRow("sc_population", spec, privacy, 0.0, 0.0, 0, bound, s, seed));
    }
  }
}

// Criterion 11.
void Term(std::uint64_t seed, Checks& c, std::vector<ExperimentRow>* rows) {
  // (a) and (b) on random instances.
  Rng rng = MakeRng(seed, 110);
  double worst_a = 0.0;
  double worst_b = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 3;
    const int n = 30;
    auto inner = std::make_shared<QuadraticMean>(
        QuadraticMean::WithCondition(d, 1.0, 4.0, 1.0, rng));
    const Dataset x = UniformBallData(n, d, 1.0, rng);
    const Vector w = SampleUnitSphere<double>(d, rng) * 0.5;
    const Tilted small(inner, 1e-6, 0.0, 2.0);
    worst_a = std::max(worst_a, std::abs(small.Value(w, x) - inner->Value(w, x)));
    const Tilted tilted(inner, 2.0, 0.0, 2.0);
    const Vector g = tilted.Subgradient(w, x);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6;
      Vector e = Vector::Zero(d);
      e(j) = h;
      const double fd =
          (tilted.Value(w + e, x) - tilted.Value(w - e, x)) / (2.0 * h);
      worst_b = std::max(worst_b,
                         std::abs(fd - g(j)) / std::max(1e-12, std::abs(g(j))));
    }
  }
  c.Expect(worst_a <= 1e-5, "tau->0 gap " + Num(worst_a));
  c.Expect(worst_b <= 1e-4, "gradient rel err " + Num(worst_b));
  c.Note("(a) " + Num(worst_a) + " (b) " + Num(worst_b));

  // (c) mechanism bound.
  const int d = 2;
  const int n = 200;
  const double mu = 1.0;
  const double R = 1.0;
  const double eps = 4.0;
  const int trials = 1000;
  auto inner =
      std::make_shared<QuadraticMean>(Matrix::Identity(d, d), mu, R);
  const double A_R = 2.0 * mu * R * R;
  const double tau = 1.0 / A_R;
  const Tilted obj(inner, tau, 0.0, A_R);
  Rng data_rng = MakeRng(seed, 111);
  const Dataset x = UniformBallData(n, d, R, data_rng);
  const FunctionClassSpec spec = obj.Spec(n);
  const double c_tau = obj.c_tau();
  c.Expect(tau * A_R <= 1.0, "tau (A_R - a_R) <= 1");
  const PrivacyParams privacy(eps, 0.0);
  RouteQuery q;
  q.spec = spec;
  q.privacy = privacy;
  q.route = Route::kTerm;
  q.impl = Implementation::kBlackbox;
  q.c_tau = c_tau;
  const MechanismParams params = SelectParams(q, OptimizerKind::kSubgradient);
  // Oracle: Delta_tau = (2L/mu) min{1, C_tau/n}.
  const double sens = 2.0 * spec.L / spec.mu * std::min(1.0, c_tau / n);
  c.Expect(std::abs(params.sensitivity.value - sens) <= 1e-12 * sens,
           "TERM sensitivity");
  c.Expect(std::abs(params.sensitivity.value -
                    TermSensitivity(inner->Spec(n), tau, 0.0, A_R).value) <=
               1e-12 * sens,
           "TERM sensitivity helper");
  Rng prep = MakeRng(seed, 112);
  const PreparedRelease p =
      PrepareBlackbox(obj, x, ConfigFromParams(params, spec, privacy), prep);
  const double f_star = obj.Value(ReferenceMinimizer(obj, x), x);
  const Summary s =
      ExcessOfRelease(p, obj, x, f_star, trials, MakeRng(seed, 113)());
  const double bound =
      9.0 * spec.L * spec.L * c_tau / spec.mu * (d / (eps * n));
  c.Expect(s.ci99_upper <= bound,
           "(c) CI " + Num(s.ci99_upper) + " > " + Num(bound));
  c.Note("(c) ratio " + Num(s.ci99_upper / bound));
  if (rows) {
    rows->push_back(MakeRow("term", spec, privacy, 0.0, params.alpha,
                            params.T, bound, s, seed));
  }
}

Dataset ClusteredData(int n, int d, double data_radius, Rng& rng) {
  DataDistribution dist;
  dist.kind = DistributionKind::kClustered;
  dist.d = d;
  dist.center = Vector::Unit(d, 0) * (0.75 * data_radius);
  dist.radius = 0.25 * data_radius;
  return dist.Sample(n, rng);
}

// Criterion 12.
void Adversarial(std::uint64_t seed, Checks& c,
                 std::vector<ExperimentRow>* rows) {
  const int d = 2;
  // (a) strongly-convex-strongly-concave toy with closed form.
  {
    const int n = 50;
    const double mu = 1.0, cc = 1.0, mu_v = 1.0, rho = 2.0;
    const AdversarialObjective obj(d, mu, cc, mu_v, rho, 1.0, 1.0);
    Rng rng = MakeRng(seed, 120);
    const Dataset x = UniformBallData(n, d, 1.0, rng);
    const double alpha = 1e-6;
    const OptResult res = ExtragradientSaddle(obj, x, alpha, 200000, rng);
    const Vector xbar = x.points.colwise().mean().transpose();
    const Vector w_star = -xbar / (mu + cc * cc / mu_v);
    const double gap = DualityGap(obj, x, res.w, res.v);
    const double dist = (res.w - w_star).norm();
    c.Expect(gap <= alpha, "(a) gap " + Num(gap));
    c.Expect(dist <= std::sqrt(2.0 * alpha / mu) + 1e-12,
             "(a) |w - w*| " + Num(dist));
    c.Note("(a) gap=" + Num(gap) + " |w-w*|=" + Num(dist) +
           " iters=" + std::to_string(res.iterations));
  }
  const int n = 200;
  const int trials = 1000;
  // (b) rho = 0 reduces to the plain mechanism.
  {
    const double eps = 4.0;
    const AdversarialObjective adv(d, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
    Rng rng = MakeRng(seed, 121);
    const Dataset x = ClusteredData(n, d, 1.0, rng);
    const FunctionClassSpec spec = adv.Spec(n);
    const PrivacyParams privacy(eps, 0.0);
    RouteQuery q;
    q.spec = spec;
    q.privacy = privacy;
    q.route = Route::kAdversarial;
    q.impl = Implementation::kBlackbox;
    const MechanismParams pa = SelectParams(q);
    Rng prep_a = MakeRng(seed, 122);
    const PreparedRelease ra = PrepareAdversarialBlackbox(
        adv, x, ConfigFromParams(pa, spec, privacy), prep_a);
    const ObjectivePtr plain = adv.Unperturbed();
    q.route = Route::kSmoothSC;
    const MechanismParams pb = SelectParams(q, OptimizerKind::kAgd);
    MechanismConfig cb = ConfigFromParams(pb, spec, privacy);
    cb.project_after_noise = true;
    Rng prep_b = MakeRng(seed, 123);
    const PreparedRelease rb = PrepareBlackbox(*plain, x, cb, prep_b);
    const double g_star = adv.G(adv.MinimizeG(x), x);
    const Summary sa = MonteCarloSummary(
        trials, MakeRng(seed, 124)(),
        [&](Rng& r) { return adv.G(Release(ra, r).w_private, x) - g_star; });
    const Summary sb = MonteCarloSummary(
        trials, MakeRng(seed, 125)(),
        [&](Rng& r) { return adv.G(Release(rb, r).w_private, x) - g_star; });
    const double tol = kZ99 * std::sqrt(sa.std * sa.std / sa.count +
                                         sb.std * sb.std / sb.count);
    c.Expect(std::abs(sa.mean - sb.mean) <= tol,
             "(b) means " + Num(sa.mean) + " vs " + Num(sb.mean));
    c.Note("(b) diff=" + Num(sa.mean - sb.mean) + " tol=" + Num(tol));
  }
  // (c) excess adversarial risk.
  {
    const double eps = 8.0;
    const double rho = 0.5;
    const AdversarialObjective adv(d, 1.0, 1.0, 0.0, rho, 1.0, 1.0);
    Rng rng = MakeRng(seed, 126);
    const Dataset x = ClusteredData(n, d, 1.0, rng);
    const Vector xbar = x.points.colwise().mean().transpose();
    c.Expect(xbar.norm() > rho / 2.0, "(c) |xbar| > rho/2");
    const FunctionClassSpec spec = adv.Spec(n);
    const PrivacyParams privacy(eps, 0.0);
    RouteQuery q;
    q.spec = spec;
    q.privacy = privacy;
    q.route = Route::kAdversarial;
    q.impl = Implementation::kBlackbox;
    const MechanismParams params = SelectParams(q);
    Rng prep = MakeRng(seed, 127);
    const PreparedRelease p = PrepareAdversarialBlackbox(
        adv, x, ConfigFromParams(params, spec, privacy), prep);
    c.Expect(p.gap <= params.alpha, "(c) saddle gap " + Num(p.gap));
    const double g_star = adv.G(adv.MinimizeG(x), x);
    const Summary s = MonteCarloSummary(
        trials, MakeRng(seed, 128)(),
        [&](Rng& r) { return adv.G(Release(p, r).w_private, x) - g_star; });
    const double r = d / (eps * n);
    const double bound =
        26.0 * spec.kappa() * spec.L * spec.L / spec.mu * r * r;
    c.Expect(s.ci99_upper <= bound,
             "(c) CI " + Num(s.ci99_upper) + " > " + Num(bound));
    c.Note("(c) ratio " + Num(s.ci99_upper / bound));
    if (rows) {
      rows->push_back(MakeRow("adversarial", spec, privacy, 0.0, params.alpha,
                              p.iterations, bound, s, seed));
    }
  }
}

// Criterion 13.
void Baselines(std::uint64_t seed, Checks& c,
               std::vector<ExperimentRow>* rows) {
  const int d = 1;
  const int n = 20;
  const AppendixF obj(d, 1.0, 1.0);
  DataDistribution dist;
  dist.kind = DistributionKind::kUniformSphere;
  dist.d = d;
  dist.radius = 1.0;
  Rng data_rng = MakeRng(seed, 130);
  const Dataset x = dist.Sample(n, data_rng);
  const FunctionClassSpec spec = obj.Spec(n);

  // Exponential mechanism law.
  {
    const double eps = 4.0;
    const GridSpec grid = GridSpec::Ball(d, 129, spec.R);
    Rng rng = MakeRng(seed, 131);
    const ExpMechResult res = ExponentialMechanism(obj, x, grid, eps, rng);
    // Oracle: p_k proportional to exp(-eps F(w_k) / (4 L R)).
    const int k = static_cast<int>(res.points.rows());
    const double xbar = x.points.col(0).mean();
    std::vector<long double> law(k);
    long double total = 0.0L;
    for (int i = 0; i < k; ++i) {
      const long double w = -spec.R + 2.0L * spec.R * i / 128.0L;
      const long double f = 0.25L * w * w + 0.25L * xbar * w;
      law[i] = std::exp(-eps * f / (4.0L * spec.L * spec.R));
      total += law[i];
    }
    std::vector<double> probs(k);
    double max_err = 0.0;
    for (int i = 0; i < k; ++i) {
      probs[i] = static_cast<double>(law[i] / total);
      max_err = std::max(max_err, std::abs(probs[i] - res.probabilities(i)));
    }
    c.Expect(k == 129, "grid size");
    c.Expect(max_err <= 1e-12, "weights vs oracle " + Num(max_err));
    std::discrete_distribution<int> pick(res.probabilities.data(),
                                         res.probabilities.data() + k);
    std::vector<long long> counts(k, 0);
    for (int t = 0; t < 100000; ++t) ++counts[pick(rng)];
    const TestResult chi = ChiSquareTest(counts, probs);
    c.Expect(chi.p_value >= 1e-3, "chi-square p " + Num(chi.p_value));
    c.Note("chi2 p=" + Num(chi.p_value));
  }
  // Localization capture.
  {
    const double eps = 4.0;
    const int trials = 10000;
    int stream = 132;
    for (double xi : {1.0, 2.0, 4.0}) {
      Rng rng = MakeRng(seed, stream++);
      int captured = 0;
      for (int t = 0; t < trials; ++t) {
        if (Localization(obj, x, eps, xi, rng).captured) ++captured;
      }
      const double p = 1.0 - d * std::exp(-xi);
      const double freq = static_cast<double>(captured) / trials;
      const double mc_std = std::sqrt(p * (1.0 - p) / trials);
      c.Expect(freq >= p - 3.0 * mc_std,
               "xi=" + Num(xi) + " capture " + Num(freq));
      c.Note("xi=" + Num(xi) + ": " + Num(freq) + " >= " +
             Num(p - 3.0 * mc_std) + " (target " + Num(p) + " - 3 sd)");
    }
  }
  // Exp + localization next to output perturbation.
  {
    const double eps = 16.0;
    const int trials = 1000;
    const PrivacyParams privacy(eps, 0.0);
    const double f_star = obj.Value(obj.ExactMinimizer(x), x);
    double eps_total = 0.0;
    const Summary exploc =
        MonteCarloSummary(trials, MakeRng(seed, 140)(), [&](Rng& rng) {
          const ExpLocResult r =
              ExpPlusLocalization(obj, x, eps, 129, rng, true);
          eps_total = r.epsilon_total;
          return obj.Value(r.sample.w, x) - f_star;
        });
    const PreparedRelease op = PrepareConceptual(obj, x, privacy, true);
    const Summary outp =
        ExcessOfRelease(op, obj, x, f_star, trials, MakeRng(seed, 141)());
    c.Expect(std::isfinite(exploc.mean) && std::isfinite(exploc.ci99_upper),
             "exp+loc risk not finite");
    c.Expect(std::abs(eps_total - eps) <= 1e-12, "composed epsilon");
    c.Note("exp+loc mean=" + Num(exploc.mean) + " output-perturbation mean=" +
           Num(outp.mean) + " regime=" +
           (ExpLocRegimeHolds(spec, eps) ? "held" : "forced"));
    if (rows) {
      rows->push_back(MakeRow("exploc", spec, privacy, 0.0, 0.0, 0,
                              ExpLocRiskScale(spec, eps), exploc, seed));
      RouteQuery q;
      q.spec = spec;
      q.privacy = privacy;
      q.route = Route::kSC;
      rows->push_back(MakeRow("sc", spec, privacy, 0.0, 0.0, 0,
                              TheoreticalBound(q), outp, seed));
    }
  }
}

// Criterion 14.
void OptimizerContracts(std::uint64_t seed, Checks& c) {
  // Subgradient method on a smooth and a non-smooth instance.
  {
    const int d = 5;
    const int n = 50;
    Rng rng = MakeRng(seed, 150);
    const Dataset x = UniformBallData(n, d, 1.0, rng);
    auto quadratic = std::make_shared<AppendixF>(d, 1.0, 1.0);
    auto median = std::make_shared<Regularized>(
        std::make_shared<AbsDeviation>(d, 1.0), 1.0);
    for (const ObjectivePtr& obj : {ObjectivePtr(quadratic),
                                    ObjectivePtr(median)}) {
      const FunctionClassSpec spec = obj->Spec(n);
      const double f_star = obj->Value(obj->ExactMinimizer(x), x);
      for (int T : {10, 100, 1000}) {
        const OptResult res = SubgradientMethod(*obj, x, T);
        const double gap = obj->Value(res.w, x) - f_star;
        const double bound = 1.1 * 2.0 * spec.L * spec.L / (spec.mu * T);
        c.Expect(gap <= bound, obj->name() + " T=" + std::to_string(T) +
                                   " gap " + Num(gap));
        c.Note(obj->name() + " T=" + std::to_string(T) + ": " +
               Num(gap / bound));
      }
    }
  }
  // AGD.
  {
    const int d = 10;
    const int n = 100;
    Rng rng = MakeRng(seed, 151);
    const QuadraticMean obj = QuadraticMean::WithCondition(d, 1.0, 100.0, 1.0,
                                                           rng);
    DataDistribution dist;
    dist.kind = DistributionKind::kPreimageBall;
    dist.d = d;
    dist.radius = 1.0;
    dist.transform = obj.m();
    const Dataset x = dist.Sample(n, rng);
    const FunctionClassSpec spec = obj.Spec(n);
    const double f_star = obj.Value(obj.ExactMinimizer(x), x);
    for (double alpha : {1e-3, 1e-6, 1e-9}) {
      // Oracle: ceil(sqrt(kappa) log((mu + beta) R^2 / (2 alpha))).
      const int T = static_cast<int>(std::ceil(
          std::sqrt(spec.beta / spec.mu) *
          std::log((spec.mu + spec.beta) * spec.R * spec.R / (2.0 * alpha))));
      c.Expect(T == AgdIterations(spec.mu, spec.beta, spec.R, alpha),
               "AGD iteration formula");
      const OptResult res = Agd(obj, x, T);
      const double gap = obj.Value(res.w, x) - f_star;
      c.Expect(gap <= alpha, "AGD alpha=" + Num(alpha) + " gap " + Num(gap));
      c.Note("agd alpha=" + Num(alpha) + " T=" + std::to_string(T) +
             " gap=" + Num(gap));
    }
  }
  // Katyusha against the ridge closed form.
  {
    const int d = 5;
    const int n = 100;
    const double lambda = 0.1;
    const double target = 1e-6;
    Rng rng = MakeRng(seed, 152);
    auto inner = std::make_shared<QuadraticMean>(
        QuadraticMean::WithCondition(d, 1.0, 10.0, 1.0, rng));
    DataDistribution dist;
    dist.kind = DistributionKind::kPreimageBall;
    dist.d = d;
    dist.radius = 1.0;
    dist.transform = inner->m();
    const Dataset x = dist.Sample(n, rng);
    const Regularized obj(inner, lambda);
    const FunctionClassSpec spec = obj.Spec(n);
    // Oracle: (beta M^2 + lambda I)^{-1} beta M xbar.
    const Matrix& m = inner->m();
    const Vector xbar = x.points.colwise().mean().transpose();
    const Matrix a = m * m + lambda * Matrix::Identity(d, d);
    const Vector ridge = a.ldlt().solve(m * xbar);
    // |w - w*|^2 <= 2 gap / mu, so a gap of mu target^2 / 2 suffices.
    const double alpha = 0.5 * spec.mu * target * target;
    const double gap0 = 0.5 * spec.beta * 4.0 * spec.R * spec.R;
    const int epochs = KatyushaEpochs(n, spec.kappa(), gap0, alpha);
    double mean_dist = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      Rng krng = MakeRng(seed, 1000 + s);
      mean_dist += (Katyusha(obj, x, epochs, krng).w - ridge).norm();
    }
    mean_dist /= seeds;
    c.Expect(mean_dist <= target, "Katyusha mean distance " + Num(mean_dist));
    c.Note("katyusha epochs=" + std::to_string(epochs) +
           " mean |w-w_ridge|=" + Num(mean_dist));
  }
}

struct CriterionInfo {
  const char* name;
  double budget;
};

CriterionInfo Info(int id) {
  switch (id) {
    case 1: return {"noise moments (GammaNorm)", 5};
    case 2: return {"gaussian moments", 5};
    case 3: return {"pure-DP certificate", 1};
    case 4: return {"sensitivity tightness", 1};
    case 5: return {"conceptual quadratic exactness", 30};
    case 6: return {"black-box SC bound", 120};
    case 7: return {"smooth SC ERM bound", 120};
    case 8: return {"regularized convex bound", 180};
    case 9: return {"smooth convex bound", 180};
    case 10: return {"population loss", 300};
    case 11: return {"TERM", 180};
    case 12: return {"adversarial", 240};
    case 13: return {"baselines", 120};
    case 14: return {"optimizer contracts", 120};
    default: break;
  }
  throw InvalidArgumentError("unknown criterion " + std::to_string(id));
}

}  // namespace

CriterionResult RunCriterion(int id, std::uint64_t seed,
                             std::vector<ExperimentRow>* rows) {
  const CriterionInfo info = Info(id);
  CriterionResult out;
  out.id = id;
  out.name = info.name;
  out.budget_seconds = info.budget;
  Checks c;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: NoiseMoments(seed, c); break;
      case 2: GaussianMoments(seed, c); break;
      case 3: PureCertificate(c); break;
      case 4: SensitivityTightness(c); break;
      case 5: ConceptualQuadratic(seed, c, rows); break;
      case 6: BlackboxSc(seed, c, rows); break;
      case 7: SmoothScErm(seed, c, rows); break;
      case 8: RegularizedConvex(seed, c, rows); break;
      case 9: SmoothConvex(seed, c, rows); break;
      case 10: PopulationLoss(seed, c, rows); break;
      case 11: Term(seed, c, rows); break;
      case 12: Adversarial(seed, c, rows); break;
      case 13: Baselines(seed, c, rows); break;
      case 14: OptimizerContracts(seed, c); break;
    }
  } catch (const std::exception& e) {
    c.Expect(false, std::string("exception: ") + e.what());
  }
  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  c.Expect(out.seconds <= out.budget_seconds,
           "runtime " + Num(out.seconds) + " s over budget " +
               Num(out.budget_seconds) + " s");
  out.passed = c.passed();
  out.detail = c.detail();
  return out;
}

bool VerifyReport::all_passed() const {
  for (const auto& r : criteria) {
    if (!r.passed) return false;
  }
  return true;
}

std::string VerifyReport::Csv() const {
  std::ostringstream out;
  WriteCsv(out, rows);
  return out.str();
}

VerifyReport RunVerify(std::uint64_t seed, const std::set<int>& only) {
  VerifyReport report;
  for (int id = 1; id <= 14; ++id) {
    if (!only.empty() && only.count(id) == 0) continue;
    report.criteria.push_back(RunCriterion(id, seed, &report.rows));
  }
  return report;
}

std::string FormatCriterion(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof(head), "[%s] %d %s (%.2f s)",
                r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return std::string(head) + (r.detail.empty() ? "" : ": " + r.detail);
}

}  // namespace dpop
