#include "dpop/mechanisms.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <memory>

namespace dpop {
namespace {

bool Smooth(Route route) {
  return route == Route::kSmoothSC || route == Route::kSmoothConvex;
}

double Trivial(const FunctionClassSpec& spec) { return spec.L * spec.R; }

int Saturate(double t) {
  if (!(t < static_cast<double>(INT_MAX))) return INT_MAX;
  return std::max(0, static_cast<int>(std::ceil(t)));
}

void RequireClass(const RouteQuery& q) {
  const FunctionClassSpec& s = q.spec;
  ValidateSpec(s);
  switch (q.route) {
    case Route::kSC:
    case Route::kTerm:
      if (!s.strongly_convex()) {
        throw UnsupportedError(RouteName(q.route) + " route requires mu > 0");
      }
      break;
    case Route::kSmoothSC:
    case Route::kAdversarial:
      if (!s.strongly_convex() || !s.smooth()) {
        throw UnsupportedError(RouteName(q.route) +
                               " route requires mu > 0 and beta > 0");
      }
      break;
    case Route::kSmoothConvex:
      if (!s.smooth()) {
        throw UnsupportedError("smooth_convex route requires beta > 0");
      }
      break;
    case Route::kConvex:
      break;
  }
  if (q.route == Route::kTerm && !(q.c_tau >= 1.0)) {
    throw InvalidArgumentError("TERM route requires C_tau >= 1");
  }
  if (q.mode == BoundMode::kPopulation) {
    if (!s.erm) {
      throw UnsupportedError("population bounds require an ERM spec");
    }
    if (q.route == Route::kTerm || q.route == Route::kAdversarial) {
      throw UnsupportedError("no population bound for route " +
                             RouteName(q.route));
    }
  }
}

double Cbrt(double v) { return std::cbrt(v); }

// beta^{1/3} L^{2/3} R^{4/3}.
double SmoothConvexScale(const FunctionClassSpec& s) {
  return Cbrt(s.beta) * Cbrt(s.L * s.L) * Cbrt(std::pow(s.R, 4));
}

double EmpiricalBound(const RouteQuery& q) {
  const FunctionClassSpec& s = q.spec;
  const double r = EffectiveRatio(s, q.privacy);
  const bool pure = q.privacy.pure();
  const bool bb = q.impl == Implementation::kBlackbox;
  const double l2_mu = s.mu > 0.0 ? s.L * s.L / s.mu : 0.0;
  switch (q.route) {
    case Route::kSC:
      if (bb) return (pure ? 9.0 : 6.0) * l2_mu * r;
      return (pure ? 2.0 : std::sqrt(2.0)) * l2_mu * r;
    case Route::kSmoothSC:
    case Route::kAdversarial:
      if (bb) return (pure ? 26.0 : 13.5) * s.kappa() * l2_mu * r * r;
      return 4.0 * s.kappa() * l2_mu * r * r;
    case Route::kConvex:
      if (bb) return (pure ? 49.0 : 25.0) * Trivial(s) * std::sqrt(r);
      return 8.5 * Trivial(s) * std::sqrt(r);
    case Route::kSmoothConvex:
      if (bb) {
        return (pure ? 65.0 : 127.0) * SmoothConvexScale(s) *
               std::pow(r, 2.0 / 3.0);
      }
      return 48.5 * SmoothConvexScale(s) * std::pow(r, 2.0 / 3.0);
    case Route::kTerm: {
      const double ratio_n = q.privacy.DimensionRatio(s.d) / s.n;
      if (bb) return 9.0 * l2_mu * q.c_tau * ratio_n;
      // L E|z| with Delta = (2L/mu) min{1, C_tau/n}.
      const double delta_tau =
          (2.0 * s.L / s.mu) * std::min(1.0, q.c_tau / s.n);
      const double ratio = q.privacy.DimensionRatio(s.d);
      return s.L * delta_tau * ratio * (pure ? 1.0 : 1.0 / std::sqrt(2.0));
    }
  }
  return Trivial(s);
}

double PopulationBound(const RouteQuery& q) {
  const FunctionClassSpec& s = q.spec;
  const double r = EffectiveRatio(s, q.privacy);
  const bool pure = q.privacy.pure();
  const double n = s.n;
  switch (q.route) {
    case Route::kSC:
      return 2.0 * s.L * s.L / s.mu * (1.0 / n + r);
    case Route::kSmoothSC:
      return s.L * s.L / s.mu * (2.0 / n + 4.0 * s.kappa() * r * r);
    case Route::kConvex:
      return Trivial(s) *
             ((pure ? 127.0 : 19.0) * std::sqrt(r) + 0.5 / std::sqrt(n));
    case Route::kSmoothConvex:
      return SmoothConvexScale(s) *
             (11.0 / std::sqrt(n) +
              (pure ? 83.0 : 43.0) * std::pow(r, 2.0 / 3.0));
    default:
      break;
  }
  throw UnsupportedError("no population bound for route " +
                         RouteName(q.route));
}

}  // namespace

std::string RouteName(Route route) {
  switch (route) {
    case Route::kSC:
      return "sc";
    case Route::kSmoothSC:
      return "smooth_sc";
    case Route::kConvex:
      return "convex";
    case Route::kSmoothConvex:
      return "smooth_convex";
    case Route::kTerm:
      return "term";
    case Route::kAdversarial:
      return "adversarial";
  }
  return "unknown";
}

Route ParseRoute(const std::string& name) {
  for (Route r : {Route::kSC, Route::kSmoothSC, Route::kConvex,
                  Route::kSmoothConvex, Route::kTerm, Route::kAdversarial}) {
    if (RouteName(r) == name) return r;
  }
  throw InvalidArgumentError("unknown route: " + name);
}

double EffectiveRatio(const FunctionClassSpec& spec,
                      const PrivacyParams& privacy) {
  const double ratio = privacy.DimensionRatio(spec.d);
  return spec.erm ? ratio / spec.n : ratio;
}

bool RegimeHolds(const RouteQuery& q, std::string* why) {
  const FunctionClassSpec& s = q.spec;
  const double r = EffectiveRatio(s, q.privacy);
  auto fail = [why](const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
  };
  const bool needs_unit =
      q.mode == BoundMode::kPopulation ||
      q.impl == Implementation::kBlackbox || q.route == Route::kConvex;
  switch (q.route) {
    case Route::kSC:
    case Route::kSmoothSC:
    case Route::kAdversarial:
    case Route::kConvex:
      if (needs_unit && r > 1.0) return fail("effective ratio exceeds 1");
      break;
    case Route::kSmoothConvex:
      if (r * r > s.L / (s.R * s.beta)) {
        return fail("squared effective ratio exceeds L/(R beta)");
      }
      break;
    case Route::kTerm:
      if (q.impl == Implementation::kBlackbox &&
          q.privacy.DimensionRatio(s.d) / s.n > 1.0) {
        return fail("ratio / n exceeds 1");
      }
      break;
  }
  return true;
}

double TheoreticalBound(const RouteQuery& q) {
  RequireClass(q);
  std::string why;
  if (!RegimeHolds(q, &why)) {
    if (q.force) return Trivial(q.spec);
    throw RegimeError(RouteName(q.route) + ": " + why);
  }
  const double bound = q.mode == BoundMode::kPopulation ? PopulationBound(q)
                                                        : EmpiricalBound(q);
  return std::min(Trivial(q.spec), bound);
}

double TheoreticalBound(const FunctionClassSpec& spec,
                        const PrivacyParams& privacy, Route route,
                        BoundMode mode) {
  RouteQuery q;
  q.spec = spec;
  q.privacy = privacy;
  q.route = route;
  q.mode = mode;
  return TheoreticalBound(q);
}

OptimizerKind DefaultOptimizer(Route route) {
  switch (route) {
    case Route::kSmoothSC:
    case Route::kSmoothConvex:
      return OptimizerKind::kAgd;
    case Route::kAdversarial:
      return OptimizerKind::kExtragradient;
    default:
      return OptimizerKind::kSubgradient;
  }
}

MechanismParams SelectParams(const RouteQuery& query,
                             std::optional<OptimizerKind> optimizer) {
  RouteQuery q = query;
  q.impl = Implementation::kBlackbox;
  q.mode = BoundMode::kEmpirical;
  RequireClass(q);
  std::string why;
  if (!RegimeHolds(q, &why) && !q.force) {
    throw RegimeError(RouteName(q.route) + ": " + why);
  }
  const FunctionClassSpec& s = q.spec;
  const double ratio = q.privacy.DimensionRatio(s.d);
  const double r = EffectiveRatio(s, q.privacy);
  const double n = s.n;

  MechanismParams p;
  p.route = q.route;
  p.optimizer = optimizer.value_or(DefaultOptimizer(q.route));
  p.project = !Smooth(q.route);
  double L_eff = s.L;
  double beta_eff = s.beta;

  switch (q.route) {
    case Route::kSC: {
      const double l2_mu = s.L * s.L / s.mu;
      p.alpha = s.erm ? l2_mu / n * std::min(1.0 / n, ratio) : l2_mu * r;
      p.mu_eff = s.mu;
      p.sensitivity = ClassSensitivity(s);
      break;
    }
    case Route::kSmoothSC:
    case Route::kAdversarial: {
      const double l2_mu = s.L * s.L / s.mu;
      const double m = std::min(s.kappa() * ratio * ratio, 1.0);
      p.alpha = s.erm ? l2_mu / (n * n) * m : l2_mu * m;
      p.mu_eff = s.mu;
      p.sensitivity = ClassSensitivity(s);
      break;
    }
    case Route::kConvex: {
      p.lambda = s.L / (s.R * std::sqrt(1.0 + 1.0 / r));
      const double base = Trivial(s) * std::pow(r, 1.5);
      p.alpha = (s.erm && q.privacy.pure())
                    ? base / std::pow(1.0 + s.d / q.privacy.epsilon(), 2)
                    : base;
      p.mu_eff = p.lambda;
      p.sensitivity = RegularizedSensitivity(s, p.lambda);
      L_eff = s.L + p.lambda * s.R;
      break;
    }
    case Route::kSmoothConvex: {
      p.lambda = Cbrt(s.beta * s.L * s.L / (s.R * s.R)) *
                 std::pow(r, 2.0 / 3.0);
      const double n_fac = s.erm ? 1.0 / (n * n) : 1.0;
      const double a1 = std::pow(s.L, 4.0 / 3.0) * Cbrt(s.R * s.R) /
                        Cbrt(s.beta) / std::pow(r, 2.0 / 3.0) * n_fac;
      const double a2 = SmoothConvexScale(s) * std::pow(r, 2.0 / 3.0);
      p.alpha = std::min(a1, a2);
      p.mu_eff = p.lambda;
      p.sensitivity = RegularizedSensitivity(s, p.lambda);
      L_eff = s.L + p.lambda * s.R;
      beta_eff = s.beta + p.lambda;
      break;
    }
    case Route::kTerm: {
      const double l2_mu = s.L * s.L / s.mu;
      p.alpha = l2_mu * q.c_tau / n * std::min(q.c_tau / n, ratio);
      p.mu_eff = s.mu;
      p.sensitivity.value = 2.0 * s.L / s.mu * std::min(1.0, q.c_tau / n);
      p.sensitivity.kind = SensitivityKind::kClassUpperBound;
      p.sensitivity.rule = "(2L/mu) min{1, C_tau/n}";
      break;
    }
  }

  switch (p.optimizer) {
    case OptimizerKind::kSubgradient:
    case OptimizerKind::kStochasticSubgradient:
      p.T = Saturate(2.0 * L_eff * L_eff / (p.mu_eff * p.alpha));
      break;
    case OptimizerKind::kAgd:
      if (!(beta_eff > 0.0)) {
        throw UnsupportedError("AGD requires a smooth objective");
      }
      p.T = AgdIterations(p.mu_eff, beta_eff, s.R, p.alpha);
      break;
    case OptimizerKind::kKatyusha:
      if (!(beta_eff > 0.0) || !s.erm) {
        throw UnsupportedError("Katyusha requires a smooth ERM objective");
      }
      p.T = KatyushaEpochs(s.n, beta_eff / p.mu_eff, 2.0 * L_eff * s.R,
                           p.alpha);
      break;
    case OptimizerKind::kExtragradient:
      if (q.route != Route::kAdversarial) {
        throw UnsupportedError("extragradient applies to the adversarial route");
      }
      p.T = 200000;
      break;
    case OptimizerKind::kExact:
      p.T = 0;
      break;
  }
  return p;
}

MechanismConfig ConfigFromParams(const MechanismParams& params,
                                 const FunctionClassSpec& spec,
                                 const PrivacyParams& privacy) {
  MechanismConfig c;
  c.privacy = privacy;
  c.spec = spec;
  c.optimizer = params.optimizer;
  c.T = params.T;
  c.lambda = params.lambda;
  c.alpha = params.alpha;
  c.project_after_noise = params.project;
  if (params.route == Route::kTerm) c.sensitivity_override = params.sensitivity;
  return c;
}

PrivateOutput Release(const PreparedRelease& prepared, Rng& rng, bool audit) {
  PrivateOutput out;
  const Vector z = SampleNoise<double>(prepared.noise, rng);
  Vector w = prepared.center + z;
  if (prepared.project) w = ProjectBall(w, prepared.R);
  out.w_private = std::move(w);
  out.noise = prepared.noise;
  out.epsilon = prepared.privacy.epsilon();
  out.delta = prepared.privacy.delta();
  out.sensitivity_used = prepared.noise.sensitivity;
  out.iterations = prepared.iterations;
  out.audit = audit;
  if (audit) out.pre_noise_point = prepared.center;
  return out;
}

namespace {

void CheckProjection(const FunctionClassSpec& spec, bool project) {
  if (!project && !spec.smooth()) {
    throw InvalidArgumentError(
        "non-smooth classes require projected outputs");
  }
}

PreparedRelease MakePrepared(Vector center, double sensitivity,
                             const FunctionClassSpec& spec,
                             const PrivacyParams& privacy, bool project) {
  PreparedRelease p;
  p.center = std::move(center);
  p.noise = CalibrateNoise(privacy, sensitivity, spec.d);
  p.project = project;
  p.R = spec.R;
  p.privacy = privacy;
  return p;
}

}  // namespace

PreparedRelease PrepareConceptual(
    const Objective& obj, const Dataset& x, const PrivacyParams& privacy,
    bool project, std::optional<SensitivityBound> sensitivity_override) {
  const FunctionClassSpec spec = obj.Spec(x.size());
  CheckProjection(spec, project);
  const SensitivityBound sens =
      sensitivity_override ? *sensitivity_override : ClassSensitivity(spec);
  return MakePrepared(dpop::ReferenceMinimizer(obj, x), sens.value, spec,
                      privacy, project);
}

PrivateOutput ConceptualOutputPerturbation(
    const Objective& obj, const Dataset& x, const PrivacyParams& privacy,
    bool project, Rng& rng,
    std::optional<SensitivityBound> sensitivity_override, bool audit) {
  return Release(
      PrepareConceptual(obj, x, privacy, project, sensitivity_override), rng,
      audit);
}

PreparedRelease PrepareConceptualRegularized(ObjectivePtr obj,
                                             const Dataset& x,
                                             const PrivacyParams& privacy,
                                             double lambda, bool project) {
  if (!(lambda > 0.0)) {
    throw InvalidArgumentError("regularization requires lambda > 0");
  }
  const FunctionClassSpec spec = obj->Spec(x.size());
  CheckProjection(spec, project);
  const Regularized reg(obj, lambda);
  return MakePrepared(dpop::ReferenceMinimizer(reg, x),
                      RegularizedSensitivity(spec, lambda).value, spec,
                      privacy, project);
}

bool IsDeterministic(OptimizerKind kind) {
  return kind != OptimizerKind::kStochasticSubgradient &&
         kind != OptimizerKind::kKatyusha;
}

OptResult RunOptimizer(OptimizerKind kind, const Objective& obj,
                       const Dataset& x, int T, Rng& rng) {
  switch (kind) {
    case OptimizerKind::kSubgradient:
      return SubgradientMethod(obj, x, T);
    case OptimizerKind::kStochasticSubgradient:
      return StochasticSubgradient(obj, x, T, rng);
    case OptimizerKind::kAgd:
      return Agd(obj, x, T);
    case OptimizerKind::kKatyusha:
      return Katyusha(obj, x, T, rng);
    case OptimizerKind::kExact: {
      OptResult res;
      res.w = dpop::ReferenceMinimizer(obj, x);
      res.value = obj.Value(res.w, x);
      return res;
    }
    case OptimizerKind::kExtragradient:
      break;
  }
  throw UnsupportedError("optimizer " + OptimizerName(kind) +
                         " does not minimize a plain objective");
}

PreparedRelease PrepareBlackbox(const Objective& obj, const Dataset& x,
                                const MechanismConfig& config, Rng& rng) {
  const FunctionClassSpec& spec = config.spec;
  if (!spec.strongly_convex()) {
    throw InvalidArgumentError("black-box output perturbation requires mu > 0");
  }
  CheckProjection(spec, config.project_after_noise);
  const SensitivityBound base = config.sensitivity_override
                                    ? *config.sensitivity_override
                                    : ClassSensitivity(spec);
  const SensitivityBound sens =
      InflateForApproximateMinimizer(base, config.alpha, spec.mu);
  const OptResult res = RunOptimizer(config.optimizer, obj, x, config.T, rng);
  PreparedRelease p = MakePrepared(res.w, sens.value, spec, config.privacy,
                                   config.project_after_noise);
  p.iterations = res.iterations;
  return p;
}

PrivateOutput BlackboxOutputPerturbation(const Objective& obj,
                                         const Dataset& x,
                                         const MechanismConfig& config,
                                         Rng& rng) {
  return Release(PrepareBlackbox(obj, x, config, rng), rng, config.audit);
}

PreparedRelease PrepareRegularizedBlackbox(ObjectivePtr obj, const Dataset& x,
                                           const MechanismConfig& config,
                                           Rng& rng) {
  if (!(config.lambda > 0.0)) {
    throw InvalidArgumentError("regularized black-box requires lambda > 0");
  }
  const FunctionClassSpec& spec = config.spec;
  CheckProjection(spec, config.project_after_noise);
  const SensitivityBound base = config.sensitivity_override
                                    ? *config.sensitivity_override
                                    : RegularizedSensitivity(spec, config.lambda);
  const SensitivityBound sens =
      InflateForApproximateMinimizer(base, config.alpha, config.lambda);
  const Regularized reg(obj, config.lambda);
  const OptResult res = RunOptimizer(config.optimizer, reg, x, config.T, rng);
  PreparedRelease p = MakePrepared(res.w, sens.value, spec, config.privacy,
                                   config.project_after_noise);
  p.iterations = res.iterations;
  return p;
}

PrivateOutput RegularizedBlackbox(ObjectivePtr obj, const Dataset& x,
                                  const MechanismConfig& config, Rng& rng) {
  return Release(PrepareRegularizedBlackbox(std::move(obj), x, config, rng),
                 rng, config.audit);
}

PreparedRelease PrepareAdversarialBlackbox(const AdversarialObjective& obj,
                                           const Dataset& x,
                                           const MechanismConfig& config,
                                           Rng& rng) {
  const FunctionClassSpec& spec = config.spec;
  if (!spec.strongly_convex()) {
    throw InvalidArgumentError("adversarial route requires mu > 0");
  }
  const SensitivityBound base = config.sensitivity_override
                                    ? *config.sensitivity_override
                                    : ClassSensitivity(spec);
  const SensitivityBound sens =
      InflateForApproximateMinimizer(base, config.alpha, spec.mu);
  const OptResult res =
      ExtragradientSaddle(obj, x, config.alpha, config.T, rng);
  PreparedRelease p =
      MakePrepared(res.w, sens.value, spec, config.privacy, true);
  p.iterations = res.iterations;
  p.gap = res.gap;
  return p;
}

PrivateOutput AdversarialBlackbox(const AdversarialObjective& obj,
                                  const Dataset& x,
                                  const MechanismConfig& config, Rng& rng) {
  return Release(PrepareAdversarialBlackbox(obj, x, config, rng), rng,
                 config.audit);
}

}  // namespace dpop
