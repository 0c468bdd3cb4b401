#include "dpop/sensitivity.h"

#include <algorithm>
#include <cmath>

namespace dpop {

SensitivityBound ClassSensitivity(const FunctionClassSpec& spec) {
  if (!(spec.mu > 0.0)) {
    throw UnsupportedError(
        "ClassSensitivity: mu = 0; use RegularizedSensitivity");
  }
  if (!(spec.L > 0.0)) throw InvalidArgumentError("L must be positive");
  double value = 2.0 * spec.L / spec.mu;
  if (spec.erm) value /= spec.n;
  return {value, SensitivityKind::kClassUpperBound,
          spec.erm ? "2L/(mu n)" : "2L/mu"};
}

SensitivityBound RegularizedSensitivity(const FunctionClassSpec& spec,
                                        double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("RegularizedSensitivity: lambda must be > 0");
  }
  double value = 2.0 * (spec.L + lambda * spec.R) / lambda;
  if (spec.erm) value /= spec.n;
  return {value, SensitivityKind::kClassUpperBound,
          spec.erm ? "2(L+lambda R)/(lambda n)" : "2(L+lambda R)/lambda"};
}

double TermConstant(double tau, double a_R, double A_R) {
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be positive");
  if (A_R < a_R) throw InvalidArgumentError("A_R must be at least a_R");
  return std::exp(tau * (A_R - a_R));
}

SensitivityBound TermSensitivity(const FunctionClassSpec& spec, double tau,
                                 double a_R, double A_R) {
  if (!(spec.mu > 0.0)) {
    throw UnsupportedError("TermSensitivity: mu must be positive");
  }
  const double c_tau = TermConstant(tau, a_R, A_R);
  const double value =
      2.0 * spec.L / spec.mu * std::min(1.0, c_tau / spec.n);
  return {value, SensitivityKind::kClassUpperBound, "(2L/mu) min{1, C_tau/n}"};
}

SensitivityBound InflateForApproximateMinimizer(const SensitivityBound& base,
                                                double alpha, double mu_eff) {
  if (!(alpha >= 0.0)) throw InvalidArgumentError("alpha must be >= 0");
  if (!(mu_eff > 0.0)) throw InvalidArgumentError("mu_eff must be positive");
  return {base.value + 2.0 * std::sqrt(2.0 * alpha / mu_eff),
          SensitivityKind::kClassUpperBound,
          base.rule + " + 2 sqrt(2 alpha/mu)"};
}

SensitivityBound QuadraticMeanSensitivity(double R, double kappa, int n) {
  if (!(R > 0.0) || !(kappa >= 1.0) || n < 1) {
    throw InvalidArgumentError("QuadraticMeanSensitivity: invalid arguments");
  }
  return {2.0 * R * std::sqrt(kappa) / n, SensitivityKind::kClassUpperBound,
          "2R sqrt(kappa)/n"};
}

}  // namespace dpop
