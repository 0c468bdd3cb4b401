#ifndef DPOP_SENSITIVITY_H_
#define DPOP_SENSITIVITY_H_

#include <string>

#include "dpop/core.h"

namespace dpop {

enum class SensitivityKind { kExactClosedForm, kClassUpperBound };

struct SensitivityBound {
  double value = 0.0;
  SensitivityKind kind = SensitivityKind::kClassUpperBound;
  std::string rule;
};

// 2L/mu, or 2L/(mu n) for ERM. Requires mu > 0.
SensitivityBound ClassSensitivity(const FunctionClassSpec& spec);

// 2(L + lambda R)/lambda, divided by n for ERM.
SensitivityBound RegularizedSensitivity(const FunctionClassSpec& spec,
                                        double lambda);

// exp(tau (A_R - a_R)).
double TermConstant(double tau, double a_R, double A_R);

// (2L/mu) min{1, C_tau / n}.
SensitivityBound TermSensitivity(const FunctionClassSpec& spec, double tau,
                                 double a_R, double A_R);

// base + 2 sqrt(2 alpha / mu_eff).
SensitivityBound InflateForApproximateMinimizer(const SensitivityBound& base,
                                                double alpha, double mu_eff);

// 2 R sqrt(kappa) / n for the quadratic-mean instance.
SensitivityBound QuadraticMeanSensitivity(double R, double kappa, int n);

}  // namespace dpop

#endif  // DPOP_SENSITIVITY_H_
