#ifndef DPOP_OBJECTIVES_H_
#define DPOP_OBJECTIVES_H_

#include <memory>
#include <string>

#include "dpop/core.h"

namespace dpop {

// Loss F(w, X) with a subgradient oracle and declared class constants.
// Optional capabilities throw UnsupportedError when absent.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual double Value(const Vector& w, const Dataset& x) const = 0;
  virtual Vector Subgradient(const Vector& w, const Dataset& x) const = 0;
  // Declared (L, mu, beta, R) for datasets of size n, with d and the ERM flag.
  virtual FunctionClassSpec Spec(int n) const = 0;

  virtual bool is_erm() const { return false; }
  virtual double SampleValue(const Vector& w, const Dataset& x, int i) const;
  virtual Vector SampleGradient(const Vector& w, const Dataset& x,
                                int i) const;

  // Closed-form minimizer over R^d, inside B(0, R) under the declared
  // parameter constraints.
  virtual bool has_exact_minimizer() const { return false; }
  virtual Vector ExactMinimizer(const Dataset& x) const;

  // Minimizer of F + (lambda/2)|w|^2 by closed form or a dedicated solver.
  virtual bool has_regularized_minimizer() const { return false; }
  virtual Vector RegularizedMinimizer(const Dataset& x, double lambda) const;

  // Dedicated high-accuracy minimizer over B(0, R).
  virtual bool has_reference_minimizer() const { return false; }
  virtual Vector ReferenceMinimizer(const Dataset& x) const;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// Average of per-sample losses; Value and Subgradient are derived.
class ErmObjective : public Objective {
 public:
  bool is_erm() const override { return true; }
  double Value(const Vector& w, const Dataset& x) const override;
  Vector Subgradient(const Vector& w, const Dataset& x) const override;
};

// f(w, x) = (beta/2)|M w - x|^2 with symmetric positive-definite M whose
// spectrum lies in (0, 1]; data in B(0, R).
class QuadraticMean : public ErmObjective {
 public:
  QuadraticMean(Matrix m, double beta, double R);
  // Random orthogonal eigenbasis, eigenvalues evenly spaced on
  // [1/sqrt(kappa), 1] so that beta M^2 has condition number kappa.
  static QuadraticMean WithCondition(int d, double beta, double kappa,
                                     double R, Rng& rng);

  std::string name() const override { return "quadratic_mean"; }
  int dim() const override { return static_cast<int>(m_.rows()); }
  FunctionClassSpec Spec(int n) const override;
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;
  double Value(const Vector& w, const Dataset& x) const override;
  Vector Subgradient(const Vector& w, const Dataset& x) const override;

  bool has_exact_minimizer() const override { return true; }
  Vector ExactMinimizer(const Dataset& x) const override;
  bool has_regularized_minimizer() const override { return true; }
  Vector RegularizedMinimizer(const Dataset& x, double lambda) const override;

  const Matrix& m() const { return m_; }
  double beta() const { return beta_; }
  double kappa() const;

 private:
  Matrix m_;
  double beta_;
  double R_;
  double eig_min_;
  double eig_max_;
};

// f(w, x) = (mu/4)|w|^2 + (L/4) x^T w with data in B(0, 1). The Hessian is
// (mu/2) I, so the declared strong-convexity modulus is mu/2.
class AppendixF : public ErmObjective {
 public:
  // R defaults to L/mu when nonpositive.
  AppendixF(int d, double mu, double L, double R = 0.0);

  std::string name() const override { return "appendix_f"; }
  int dim() const override { return d_; }
  FunctionClassSpec Spec(int n) const override;
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;
  double Value(const Vector& w, const Dataset& x) const override;
  Vector Subgradient(const Vector& w, const Dataset& x) const override;

  bool has_exact_minimizer() const override { return true; }
  // -(L / (2 mu n)) sum_i x_i.
  Vector ExactMinimizer(const Dataset& x) const override;
  bool has_regularized_minimizer() const override { return true; }
  Vector RegularizedMinimizer(const Dataset& x, double lambda) const override;

  double mu() const { return mu_; }
  double L() const { return L_; }
  double R() const { return R_; }

 private:
  int d_;
  double mu_;
  double L_;
  double R_;
};

// f(w, x) = |w - x|: convex, 1-Lipschitz, non-smooth. Data in B(0, R).
class AbsDeviation : public ErmObjective {
 public:
  AbsDeviation(int d, double R);

  std::string name() const override { return "abs_deviation"; }
  int dim() const override { return d_; }
  FunctionClassSpec Spec(int n) const override;
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;
  double Value(const Vector& w, const Dataset& x) const override;
  Vector Subgradient(const Vector& w, const Dataset& x) const override;

  // Majorize-minimize (Weiszfeld) iteration for the regularized median.
  bool has_regularized_minimizer() const override { return true; }
  Vector RegularizedMinimizer(const Dataset& x, double lambda) const override;
  // Geometric median.
  bool has_reference_minimizer() const override { return true; }
  Vector ReferenceMinimizer(const Dataset& x) const override;

 private:
  int d_;
  double R_;
};

// f(w, (a, y)) = log(1 + exp(-y a^T w)) with |a| <= feature_radius and
// labels in {-1, +1}.
class Logistic : public ErmObjective {
 public:
  Logistic(int d, double R, double feature_radius);

  std::string name() const override { return "logistic"; }
  int dim() const override { return d_; }
  FunctionClassSpec Spec(int n) const override;
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;

 private:
  int d_;
  double R_;
  double feature_radius_;
};

// f(w, x) = (mu/2)|w|^2 + <w, x> with data in B(0, data_radius).
class LinearQuadratic : public ErmObjective {
 public:
  LinearQuadratic(int d, double mu, double R, double data_radius);

  std::string name() const override { return "linear_quadratic"; }
  int dim() const override { return d_; }
  FunctionClassSpec Spec(int n) const override;
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;
  bool has_exact_minimizer() const override { return mu_ > 0.0; }
  Vector ExactMinimizer(const Dataset& x) const override;

 private:
  int d_;
  double mu_;
  double R_;
  double data_radius_;
};

// F(w, X) + (lambda/2)|w|^2. Declared spec: mu + lambda, L + lambda R,
// beta + lambda (beta stays 0 for non-smooth inner losses).
class Regularized : public Objective {
 public:
  Regularized(ObjectivePtr inner, double lambda);

  std::string name() const override { return inner_->name() + "+ridge"; }
  int dim() const override { return inner_->dim(); }
  double Value(const Vector& w, const Dataset& x) const override;
  Vector Subgradient(const Vector& w, const Dataset& x) const override;
  FunctionClassSpec Spec(int n) const override;
  bool is_erm() const override { return inner_->is_erm(); }
  double SampleValue(const Vector& w, const Dataset& x, int i) const override;
  Vector SampleGradient(const Vector& w, const Dataset& x,
                        int i) const override;
  bool has_exact_minimizer() const override {
    return inner_->has_regularized_minimizer();
  }
  Vector ExactMinimizer(const Dataset& x) const override;

  const Objective& inner() const { return *inner_; }
  double lambda() const { return lambda_; }

 private:
  ObjectivePtr inner_;
  double lambda_;
};

// F_tau(w) = (1/tau) log((1/n) sum_i exp(tau f(w, x_i))), evaluated with a
// max shift. a_R <= f <= A_R on B(0, R) x data universe.
class Tilted : public Objective {
 public:
  static constexpr double kDefaultTauMax = 1e3;

  Tilted(ObjectivePtr inner, double tau, double a_R, double A_R,
         double tau_max = kDefaultTauMax);

  std::string name() const override { return "tilted(" + inner_->name() + ")"; }
  int dim() const override { return inner_->dim(); }
  double Value(const Vector& w, const Dataset& x) const override;
  // sum_i v_i grad f(w, x_i) with softmax weights v_i.
  Vector Subgradient(const Vector& w, const Dataset& x) const override;
  // beta_tau = beta + 2 L^2 tau for smooth inner losses.
  FunctionClassSpec Spec(int n) const override;

  Vector Weights(const Vector& w, const Dataset& x) const;
  double tau() const { return tau_; }
  double a_R() const { return a_R_; }
  double A_R() const { return A_R_; }
  double c_tau() const;

 private:
  ObjectivePtr inner_;
  double tau_;
  double a_R_;
  double A_R_;
};

// H(w, v) = (1/n) sum_i h(w, x_i, v_i) with
// h = (mu/2)|w|^2 + <w, x_i> + c <w, v_i> - (mu_v/2)|v_i|^2 and each v_i in
// the centered ball of diameter rho. Perturbations are stored one per row.
class AdversarialObjective {
 public:
  AdversarialObjective(int d, double mu, double c, double mu_v, double rho,
                       double R, double data_radius);

  int dim() const { return d_; }
  double rho() const { return rho_; }
  double mu() const { return mu_; }
  double c() const { return c_; }
  double mu_v() const { return mu_v_; }
  double R() const { return R_; }
  double data_radius() const { return data_radius_; }
  // L = mu R + data_radius + |c| rho/2, mu, beta = mu; ERM form.
  FunctionClassSpec Spec(int n) const;

  double H(const Vector& w, const Matrix& v, const Dataset& x) const;
  Vector GradW(const Vector& w, const Matrix& v, const Dataset& x) const;
  // Row i is the gradient of h(w, x_i, .) at v_i (not divided by n).
  Matrix GradV(const Vector& w, const Matrix& v, const Dataset& x) const;
  Matrix ProjectV(const Matrix& v) const;

  // Per-sample maximizer over the perturbation ball.
  Matrix BestResponse(const Vector& w, const Dataset& x) const;
  // G(w) = max_v H(w, v).
  double G(const Vector& w, const Dataset& x) const;
  // Subgradient of G.
  Vector GradG(const Vector& w, const Dataset& x) const;
  // argmin_{w in B(0, R)} H(w, v).
  Vector MinimizeW(const Matrix& v, const Dataset& x) const;
  // argmin over R^d of G (radial one-dimensional solve).
  Vector MinimizeG(const Dataset& x) const;

  // H(., 0) as an ordinary objective.
  ObjectivePtr Unperturbed() const;

 private:
  // Value and derivative of phi(s) = max_{|v| <= rho/2} (c s v - mu_v v^2/2)
  // for s = |w| >= 0.
  double Phi(double s) const;
  double PhiPrime(double s) const;

  int d_;
  double mu_;
  double c_;
  double mu_v_;
  double rho_;
  double R_;
  double data_radius_;
};

}  // namespace dpop

#endif  // DPOP_OBJECTIVES_H_
