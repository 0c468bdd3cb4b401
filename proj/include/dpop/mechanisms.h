#ifndef DPOP_MECHANISMS_H_
#define DPOP_MECHANISMS_H_

#include <optional>
#include <string>

#include "dpop/core.h"
#include "dpop/noise.h"
#include "dpop/objectives.h"
#include "dpop/optimizers.h"
#include "dpop/sensitivity.h"

namespace dpop {

enum class Route { kSC, kSmoothSC, kConvex, kSmoothConvex, kTerm, kAdversarial };
enum class BoundMode { kEmpirical, kPopulation };
// Conceptual: exact minimizer plus noise. Blackbox: approximate minimizer
// with the accuracy prescribed by select_params.
enum class Implementation { kConceptual, kBlackbox };

std::string RouteName(Route route);
Route ParseRoute(const std::string& name);

struct RouteQuery {
  FunctionClassSpec spec;
  PrivacyParams privacy{1.0, 0.0};
  Route route = Route::kSC;
  BoundMode mode = BoundMode::kEmpirical;
  Implementation impl = Implementation::kConceptual;
  // C_tau for the TERM route.
  double c_tau = 1.0;
  // Report the trivial bound LR instead of refusing outside the regime.
  bool force = false;
};

// d/eps (delta = 0) or sqrt(d)(c + sqrt(c^2 + eps))/eps, divided by n for ERM.
double EffectiveRatio(const FunctionClassSpec& spec,
                      const PrivacyParams& privacy);

// Whether the hypothesis of the result behind the query holds; `why`
// receives the failed condition.
bool RegimeHolds(const RouteQuery& query, std::string* why = nullptr);

// min{LR, bound}. Throws RegimeError outside the regime unless force, in
// which case LR is returned. Throws UnsupportedError for incompatible
// route/spec pairs.
double TheoreticalBound(const RouteQuery& query);
double TheoreticalBound(const FunctionClassSpec& spec,
                        const PrivacyParams& privacy, Route route,
                        BoundMode mode);

struct MechanismParams {
  Route route = Route::kSC;
  double lambda = 0.0;
  double alpha = 0.0;
  // Strong-convexity modulus of the optimized objective (mu or lambda).
  double mu_eff = 0.0;
  // Base sensitivity before inflation.
  SensitivityBound sensitivity;
  bool project = true;
  OptimizerKind optimizer = OptimizerKind::kSubgradient;
  // Iterations (epochs for Katyusha, iteration cap for extragradient).
  int T = 0;
};

// Route defaults: subgradient for SC/Convex/TERM, AGD for smooth routes,
// extragradient for Adversarial.
OptimizerKind DefaultOptimizer(Route route);

// lambda, alpha and T as prescribed for the route. Throws RegimeError
// outside the regime unless force.
MechanismParams SelectParams(const RouteQuery& query,
                             std::optional<OptimizerKind> optimizer =
                                 std::nullopt);

struct MechanismConfig {
  PrivacyParams privacy{1.0, 0.0};
  FunctionClassSpec spec;
  OptimizerKind optimizer = OptimizerKind::kSubgradient;
  int T = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  bool project_after_noise = true;
  std::optional<SensitivityBound> sensitivity_override;
  // Retains the pre-noise point; the output is then not private.
  bool audit = false;
};

MechanismConfig ConfigFromParams(const MechanismParams& params,
                                 const FunctionClassSpec& spec,
                                 const PrivacyParams& privacy);

struct PrivateOutput {
  Vector w_private;
  NoiseSpec noise;
  double epsilon = 0.0;
  double delta = 0.0;
  double sensitivity_used = 0.0;
  std::optional<Vector> pre_noise_point;
  bool audit = false;
  int iterations = 0;
};

// The deterministic part of a mechanism: pre-noise point and calibrated
// noise law. Release draws the noise.
struct PreparedRelease {
  Vector center;
  NoiseSpec noise;
  bool project = true;
  double R = 1.0;
  PrivacyParams privacy{1.0, 0.0};
  int iterations = 0;
  double gap = 0.0;
};

PrivateOutput Release(const PreparedRelease& prepared, Rng& rng,
                      bool audit = false);

// w* + z (projected when requested).
PreparedRelease PrepareConceptual(
    const Objective& obj, const Dataset& x, const PrivacyParams& privacy,
    bool project,
    std::optional<SensitivityBound> sensitivity_override = std::nullopt);
PrivateOutput ConceptualOutputPerturbation(
    const Objective& obj, const Dataset& x, const PrivacyParams& privacy,
    bool project, Rng& rng,
    std::optional<SensitivityBound> sensitivity_override = std::nullopt,
    bool audit = false);

// Regularized conceptual variant: argmin over B(0, R) of F_lambda plus noise
// calibrated to the regularized sensitivity.
PreparedRelease PrepareConceptualRegularized(ObjectivePtr obj,
                                             const Dataset& x,
                                             const PrivacyParams& privacy,
                                             double lambda, bool project);

// Runs the configured optimizer; rng feeds stochastic methods only.
OptResult RunOptimizer(OptimizerKind kind, const Objective& obj,
                       const Dataset& x, int T, Rng& rng);
bool IsDeterministic(OptimizerKind kind);

// Black-box: w_T + z with z calibrated to Delta + 2 sqrt(2 alpha / mu).
PreparedRelease PrepareBlackbox(const Objective& obj, const Dataset& x,
                                const MechanismConfig& config, Rng& rng);
PrivateOutput BlackboxOutputPerturbation(const Objective& obj,
                                         const Dataset& x,
                                         const MechanismConfig& config,
                                         Rng& rng);

// Regularized black-box: optimizer on F_lambda, noise calibrated to
// Delta_lambda + 2 sqrt(2 alpha / lambda).
PreparedRelease PrepareRegularizedBlackbox(ObjectivePtr obj, const Dataset& x,
                                           const MechanismConfig& config,
                                           Rng& rng);
PrivateOutput RegularizedBlackbox(ObjectivePtr obj, const Dataset& x,
                                  const MechanismConfig& config, Rng& rng);

// Adversarial black-box: alpha-saddle point by extragradient, then
// Pi(w_T + z) with z calibrated to Delta + 2 sqrt(2 alpha / mu).
PreparedRelease PrepareAdversarialBlackbox(const AdversarialObjective& obj,
                                           const Dataset& x,
                                           const MechanismConfig& config,
                                           Rng& rng);
PrivateOutput AdversarialBlackbox(const AdversarialObjective& obj,
                                  const Dataset& x,
                                  const MechanismConfig& config, Rng& rng);

}  // namespace dpop

#endif  // DPOP_MECHANISMS_H_
