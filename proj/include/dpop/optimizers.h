#ifndef DPOP_OPTIMIZERS_H_
#define DPOP_OPTIMIZERS_H_

#include <optional>
#include <string>
#include <vector>

#include "dpop/core.h"
#include "dpop/objectives.h"

namespace dpop {

enum class OptimizerKind {
  kSubgradient,
  kStochasticSubgradient,
  kAgd,
  kKatyusha,
  kExtragradient,
  kExact,
};

std::string OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(const std::string& name);

struct OptOptions {
  std::optional<Vector> w0;
  bool record_trace = false;
};

struct OptResult {
  Vector w;
  int iterations = 0;
  double value = 0.0;
  // Objective value per iteration (and duality gap per check for saddles).
  std::vector<double> trace;
  std::vector<double> gap_trace;
  // Saddle solvers only.
  Matrix v;
  double gap = 0.0;
};

// ceil(2 L^2 / (mu alpha)).
int SubgradientIterations(double L, double mu, double alpha);
// ceil(sqrt(kappa) log((mu + beta) R^2 / (2 alpha))), at least 0.
int AgdIterations(double mu, double beta, double R, double alpha);
// ceil((4 + sqrt(3 kappa / (2 n))) log(4 gap0 / alpha)) epochs of 2n steps.
int KatyushaEpochs(int n, double kappa, double gap0, double alpha);

// Projected subgradient method with steps 2/(mu (t+1)); returns the earliest
// best iterate among w_1..w_T.
OptResult SubgradientMethod(const Objective& obj, const Dataset& x, int T,
                            const OptOptions& options = {});

// Uniform sampling with replacement, steps 2/(mu (t+1)); returns the
// 2t/(T(T+1))-weighted average of w_1..w_T.
OptResult StochasticSubgradient(const Objective& obj, const Dataset& x, int T,
                                Rng& rng, const OptOptions& options = {});

// Projected accelerated gradient with momentum (sqrt(kappa)-1)/(sqrt(kappa)+1);
// returns y_T.
OptResult Agd(const Objective& obj, const Dataset& x, int T,
              const OptOptions& options = {});

// Projected accelerated gradient for smooth convex losses (mu may be 0) with
// adaptive restart; used for reference solves.
OptResult Fista(const Objective& obj, const Dataset& x, int T,
                const OptOptions& options = {});

// Katyusha on F = (1/n) sum g_i + (mu/2)|w|^2 with g_i = f_i - (mu/2)|w|^2.
// T counts epochs of m = 2n inner steps.
OptResult Katyusha(const Objective& obj, const Dataset& x, int epochs,
                   Rng& rng, const OptOptions& options = {});

// max_v H(w, v) - min_{w' in B(0, R)} H(w', v).
double DualityGap(const AdversarialObjective& obj, const Dataset& x,
                  const Vector& w, const Matrix& v);

struct SaddleOptions {
  int check_every = 10;
  std::optional<Vector> w0;
  std::optional<Matrix> v0;
  bool record_trace = false;
};

// Projected extragradient with per-sample perturbation blocks. Throws
// ConvergenceError carrying the best gap when max_iters is exhausted.
OptResult ExtragradientSaddle(const AdversarialObjective& obj,
                              const Dataset& x, double target_alpha,
                              int max_iters, Rng& rng,
                              const SaddleOptions& options = {});

// High-accuracy minimizer over B(0, R): closed form, dedicated solver, or a
// long first-order run chosen from the declared class.
Vector ReferenceMinimizer(const Objective& obj, const Dataset& x);

// Writes iter,value,gap rows.
void WriteTrace(const std::string& path, const OptResult& result);

}  // namespace dpop

#endif  // DPOP_OPTIMIZERS_H_
