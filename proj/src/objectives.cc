#include "dpop/objectives.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dpop {
namespace {

void CheckSample(const Dataset& x, int i) {
  if (i < 0 || i >= x.size()) {
    throw InvalidArgumentError("sample index out of range");
  }
}

Vector Mean(const Dataset& x) {
  return x.points.colwise().mean().transpose();
}

// Majorize-minimize iteration for argmin (1/n) sum |w - x_i| + (lambda/2)|w|^2.
Vector RegularizedMedian(const Dataset& x, double lambda) {
  constexpr int kMaxIters = 200000;
  constexpr double kTol = 1e-15;
  constexpr double kFloor = 1e-300;
  const int n = x.size();
  Vector w = Mean(x) / (1.0 + lambda);
  for (int it = 0; it < kMaxIters; ++it) {
    Vector num = Vector::Zero(x.record_dim());
    double den = n * lambda;
    bool at_point = false;
    for (int i = 0; i < n; ++i) {
      const double dist = (w - x.record(i)).norm();
      if (dist < kFloor) {
        at_point = true;
        continue;
      }
      num += x.record(i) / dist;
      den += 1.0 / dist;
    }
    if (at_point) {
      // Optimality at a data point: the remaining pull has norm <= 1.
      Vector pull = lambda * n * w;
      for (int i = 0; i < n; ++i) {
        const double dist = (w - x.record(i)).norm();
        if (dist >= kFloor) pull += (w - x.record(i)) / dist;
      }
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if ((w - x.record(i)).norm() < kFloor) ++count;
      }
      if (pull.norm() <= count) return w;
      // Step off the point along the descent direction.
      w -= 1e-9 * pull / pull.norm();
      continue;
    }
    Vector next = num / den;
    const double change = (next - w).norm();
    w = std::move(next);
    if (change <= kTol * std::max(1.0, w.norm())) break;
  }
  return w;
}

}  // namespace

double Objective::SampleValue(const Vector&, const Dataset&, int) const {
  throw UnsupportedError(name() + ": per-sample losses unavailable");
}

Vector Objective::SampleGradient(const Vector&, const Dataset&, int) const {
  throw UnsupportedError(name() + ": per-sample gradients unavailable");
}

Vector Objective::ExactMinimizer(const Dataset&) const {
  throw UnsupportedError(name() + ": no closed-form minimizer");
}

Vector Objective::RegularizedMinimizer(const Dataset&, double) const {
  throw UnsupportedError(name() + ": no regularized minimizer");
}

Vector Objective::ReferenceMinimizer(const Dataset&) const {
  throw UnsupportedError(name() + ": no dedicated reference minimizer");
}

double ErmObjective::Value(const Vector& w, const Dataset& x) const {
  double total = 0.0;
  for (int i = 0; i < x.size(); ++i) total += SampleValue(w, x, i);
  return total / x.size();
}

Vector ErmObjective::Subgradient(const Vector& w, const Dataset& x) const {
  Vector g = Vector::Zero(dim());
  for (int i = 0; i < x.size(); ++i) g += SampleGradient(w, x, i);
  return g / x.size();
}

// QuadraticMean

QuadraticMean::QuadraticMean(Matrix m, double beta, double R)
    : m_(std::move(m)), beta_(beta), R_(R) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) {
    throw InvalidArgumentError("QuadraticMean: M must be square");
  }
  if (!(beta > 0.0) || !(R > 0.0)) {
    throw InvalidArgumentError("QuadraticMean: beta and R must be positive");
  }
  if (!m_.isApprox(m_.transpose(), 1e-12)) {
    throw InvalidArgumentError("QuadraticMean: M must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m_);
  eig_min_ = eig.eigenvalues().minCoeff();
  eig_max_ = eig.eigenvalues().maxCoeff();
  if (!(eig_min_ > 0.0) || eig_max_ > 1.0 + 1e-12) {
    throw InvalidArgumentError("QuadraticMean: spectrum of M must lie in (0,1]");
  }
}

QuadraticMean QuadraticMean::WithCondition(int d, double beta, double kappa,
                                           double R, Rng& rng) {
  if (d < 1 || !(kappa >= 1.0)) {
    throw InvalidArgumentError("WithCondition: need d >= 1 and kappa >= 1");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  }
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector eig(d);
  const double lo = 1.0 / std::sqrt(kappa);
  for (int i = 0; i < d; ++i) {
    eig(i) = d == 1 ? 1.0 : lo + (1.0 - lo) * i / (d - 1);
  }
  if (d == 1 && kappa > 1.0) eig(0) = lo;
  Matrix m = q * eig.asDiagonal() * q.transpose();
  m = 0.5 * (m + m.transpose()).eval();
  return QuadraticMean(m, beta, R);
}

double QuadraticMean::kappa() const {
  return (eig_max_ * eig_max_) / (eig_min_ * eig_min_);
}

FunctionClassSpec QuadraticMean::Spec(int n) const {
  FunctionClassSpec s;
  s.L = 2.0 * beta_ * R_;
  s.mu = beta_ * eig_min_ * eig_min_;
  s.beta = beta_ * eig_max_ * eig_max_;
  s.R = R_;
  s.n = n;
  s.d = dim();
  s.erm = true;
  return s;
}

double QuadraticMean::SampleValue(const Vector& w, const Dataset& x,
                                  int i) const {
  CheckSample(x, i);
  return 0.5 * beta_ * (m_ * w - x.record(i)).squaredNorm();
}

Vector QuadraticMean::SampleGradient(const Vector& w, const Dataset& x,
                                     int i) const {
  CheckSample(x, i);
  return beta_ * (m_ * (m_ * w - x.record(i)));
}

double QuadraticMean::Value(const Vector& w, const Dataset& x) const {
  const Vector mw = m_ * w;
  return 0.5 * beta_ *
         (x.points.rowwise() - mw.transpose()).rowwise().squaredNorm().mean();
}

Vector QuadraticMean::Subgradient(const Vector& w, const Dataset& x) const {
  return beta_ * (m_ * (m_ * w - Mean(x)));
}

Vector QuadraticMean::ExactMinimizer(const Dataset& x) const {
  return m_.ldlt().solve(Mean(x));
}

Vector QuadraticMean::RegularizedMinimizer(const Dataset& x,
                                           double lambda) const {
  const int d = dim();
  const Matrix a = beta_ * m_ * m_ + lambda * Matrix::Identity(d, d);
  return a.ldlt().solve(beta_ * (m_ * Mean(x)));
}

// AppendixF

AppendixF::AppendixF(int d, double mu, double L, double R)
    : d_(d), mu_(mu), L_(L), R_(R > 0.0 ? R : L / mu) {
  if (d < 1) throw InvalidArgumentError("AppendixF: d must be positive");
  if (!(mu > 0.0) || !(L > 0.0)) {
    throw InvalidArgumentError("AppendixF: mu and L must be positive");
  }
  if (R_ < L / (2.0 * mu)) {
    throw InvalidArgumentError("AppendixF: R must be at least L/(2 mu)");
  }
}

FunctionClassSpec AppendixF::Spec(int n) const {
  FunctionClassSpec s;
  // Gradient (mu/2) w + (L/4) x has norm at most mu R/2 + L/4 on B(0, R).
  s.L = std::max(L_, 0.5 * mu_ * R_ + 0.25 * L_);
  s.mu = 0.5 * mu_;
  s.beta = 0.5 * mu_;
  s.R = R_;
  s.n = n;
  s.d = d_;
  s.erm = true;
  return s;
}

double AppendixF::SampleValue(const Vector& w, const Dataset& x, int i) const {
  CheckSample(x, i);
  return 0.25 * mu_ * w.squaredNorm() + 0.25 * L_ * x.record(i).dot(w);
}

Vector AppendixF::SampleGradient(const Vector& w, const Dataset& x,
                                 int i) const {
  CheckSample(x, i);
  return 0.5 * mu_ * w + 0.25 * L_ * x.record(i);
}

double AppendixF::Value(const Vector& w, const Dataset& x) const {
  return 0.25 * mu_ * w.squaredNorm() + 0.25 * L_ * Mean(x).dot(w);
}

Vector AppendixF::Subgradient(const Vector& w, const Dataset& x) const {
  return 0.5 * mu_ * w + 0.25 * L_ * Mean(x);
}

Vector AppendixF::ExactMinimizer(const Dataset& x) const {
  return -(L_ / (2.0 * mu_ * x.size())) * x.points.colwise().sum().transpose();
}

Vector AppendixF::RegularizedMinimizer(const Dataset& x, double lambda) const {
  return -(0.25 * L_ / (0.5 * mu_ + lambda)) * Mean(x);
}

// AbsDeviation

AbsDeviation::AbsDeviation(int d, double R) : d_(d), R_(R) {
  if (d < 1 || !(R > 0.0)) {
    throw InvalidArgumentError("AbsDeviation: need d >= 1 and R > 0");
  }
}

FunctionClassSpec AbsDeviation::Spec(int n) const {
  FunctionClassSpec s;
  s.L = 1.0;
  s.mu = 0.0;
  s.beta = 0.0;
  s.R = R_;
  s.n = n;
  s.d = d_;
  s.erm = true;
  return s;
}

double AbsDeviation::SampleValue(const Vector& w, const Dataset& x,
                                 int i) const {
  CheckSample(x, i);
  return (w - x.record(i)).norm();
}

Vector AbsDeviation::SampleGradient(const Vector& w, const Dataset& x,
                                    int i) const {
  CheckSample(x, i);
  Vector diff = w - x.record(i);
  const double norm = diff.norm();
  if (norm == 0.0) return Vector::Zero(d_);
  return diff / norm;
}

double AbsDeviation::Value(const Vector& w, const Dataset& x) const {
  if (x.size() == 0) throw InvalidArgumentError("empty dataset");
  return (x.points.rowwise() - w.transpose()).rowwise().norm().mean();
}

Vector AbsDeviation::Subgradient(const Vector& w, const Dataset& x) const {
  if (x.size() == 0) throw InvalidArgumentError("empty dataset");
  const Matrix diff = (-x.points).rowwise() + w.transpose();
  const Vector norms = diff.rowwise().norm();
  Vector g = Vector::Zero(d_);
  for (int i = 0; i < x.size(); ++i) {
    if (norms(i) > 0.0) g += diff.row(i).transpose() / norms(i);
  }
  return g / x.size();
}

Vector AbsDeviation::RegularizedMinimizer(const Dataset& x,
                                          double lambda) const {
  if (!(lambda >= 0.0)) {
    throw InvalidArgumentError("RegularizedMinimizer: lambda must be >= 0");
  }
  return RegularizedMedian(x, lambda);
}

Vector AbsDeviation::ReferenceMinimizer(const Dataset& x) const {
  return ProjectBall(RegularizedMedian(x, 0.0), R_);
}

// Logistic

Logistic::Logistic(int d, double R, double feature_radius)
    : d_(d), R_(R), feature_radius_(feature_radius) {
  if (d < 1 || !(R > 0.0) || !(feature_radius > 0.0)) {
    throw InvalidArgumentError("Logistic: invalid parameters");
  }
}

FunctionClassSpec Logistic::Spec(int n) const {
  FunctionClassSpec s;
  s.L = feature_radius_;
  s.mu = 0.0;
  s.beta = 0.25 * feature_radius_ * feature_radius_;
  s.R = R_;
  s.n = n;
  s.d = d_;
  s.erm = true;
  return s;
}

double Logistic::SampleValue(const Vector& w, const Dataset& x, int i) const {
  CheckSample(x, i);
  if (!x.has_labels()) throw InvalidArgumentError("Logistic: labels required");
  const double margin = x.labels(i) * x.record(i).dot(w);
  // log(1 + exp(-m)) without overflow.
  return margin > 0.0 ? std::log1p(std::exp(-margin))
                      : -margin + std::log1p(std::exp(margin));
}

Vector Logistic::SampleGradient(const Vector& w, const Dataset& x,
                                int i) const {
  CheckSample(x, i);
  if (!x.has_labels()) throw InvalidArgumentError("Logistic: labels required");
  const double y = x.labels(i);
  const double margin = y * x.record(i).dot(w);
  // sigma(-m) computed stably.
  const double s = margin > 0.0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                : 1.0 / (1.0 + std::exp(margin));
  return -y * s * x.record(i);
}

// LinearQuadratic

LinearQuadratic::LinearQuadratic(int d, double mu, double R,
                                 double data_radius)
    : d_(d), mu_(mu), R_(R), data_radius_(data_radius) {
  if (d < 1 || !(mu >= 0.0) || !(R > 0.0) || !(data_radius >= 0.0)) {
    throw InvalidArgumentError("LinearQuadratic: invalid parameters");
  }
}

FunctionClassSpec LinearQuadratic::Spec(int n) const {
  FunctionClassSpec s;
  s.L = mu_ * R_ + data_radius_;
  s.mu = mu_;
  s.beta = mu_;
  s.R = R_;
  s.n = n;
  s.d = d_;
  s.erm = true;
  return s;
}

double LinearQuadratic::SampleValue(const Vector& w, const Dataset& x,
                                    int i) const {
  CheckSample(x, i);
  return 0.5 * mu_ * w.squaredNorm() + w.dot(x.record(i));
}

Vector LinearQuadratic::SampleGradient(const Vector& w, const Dataset& x,
                                       int i) const {
  CheckSample(x, i);
  return mu_ * w + x.record(i);
}

Vector LinearQuadratic::ExactMinimizer(const Dataset& x) const {
  if (!(mu_ > 0.0)) return Objective::ExactMinimizer(x);
  return -Mean(x) / mu_;
}

// Regularized

Regularized::Regularized(ObjectivePtr inner, double lambda)
    : inner_(std::move(inner)), lambda_(lambda) {
  if (!inner_) throw InvalidArgumentError("Regularized: null inner objective");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("Regularized: lambda must be positive");
  }
}

double Regularized::Value(const Vector& w, const Dataset& x) const {
  return inner_->Value(w, x) + 0.5 * lambda_ * w.squaredNorm();
}

Vector Regularized::Subgradient(const Vector& w, const Dataset& x) const {
  return inner_->Subgradient(w, x) + lambda_ * w;
}

FunctionClassSpec Regularized::Spec(int n) const {
  FunctionClassSpec s = inner_->Spec(n);
  s.L += lambda_ * s.R;
  s.mu += lambda_;
  if (s.beta > 0.0) s.beta += lambda_;
  return s;
}

double Regularized::SampleValue(const Vector& w, const Dataset& x,
                                int i) const {
  return inner_->SampleValue(w, x, i) + 0.5 * lambda_ * w.squaredNorm();
}

Vector Regularized::SampleGradient(const Vector& w, const Dataset& x,
                                   int i) const {
  return inner_->SampleGradient(w, x, i) + lambda_ * w;
}

Vector Regularized::ExactMinimizer(const Dataset& x) const {
  return inner_->RegularizedMinimizer(x, lambda_);
}

// Tilted

Tilted::Tilted(ObjectivePtr inner, double tau, double a_R, double A_R,
               double tau_max)
    : inner_(std::move(inner)), tau_(tau), a_R_(a_R), A_R_(A_R) {
  if (!inner_ || !inner_->is_erm()) {
    throw InvalidArgumentError("Tilted: inner objective must be of ERM form");
  }
  if (!(tau > 0.0) || tau > tau_max) {
    throw InvalidArgumentError("Tilted: tau must lie in (0, tau_max]");
  }
  if (A_R < a_R) throw InvalidArgumentError("Tilted: A_R must be >= a_R");
}

double Tilted::c_tau() const { return std::exp(tau_ * (A_R_ - a_R_)); }

double Tilted::Value(const Vector& w, const Dataset& x) const {
  const int n = x.size();
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = tau_ * inner_->SampleValue(w, x, i);
  const double shift = z.maxCoeff();
  const double sum = (z.array() - shift).exp().sum();
  return (shift + std::log(sum / n)) / tau_;
}

Vector Tilted::Weights(const Vector& w, const Dataset& x) const {
  const int n = x.size();
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = tau_ * inner_->SampleValue(w, x, i);
  Vector v = (z.array() - z.maxCoeff()).exp();
  return v / v.sum();
}

Vector Tilted::Subgradient(const Vector& w, const Dataset& x) const {
  const Vector v = Weights(w, x);
  Vector g = Vector::Zero(dim());
  for (int i = 0; i < x.size(); ++i) {
    g += v(i) * inner_->SampleGradient(w, x, i);
  }
  return g;
}

FunctionClassSpec Tilted::Spec(int n) const {
  FunctionClassSpec s = inner_->Spec(n);
  if (s.beta > 0.0) s.beta += 2.0 * s.L * s.L * tau_;
  s.erm = false;
  return s;
}

// AdversarialObjective

AdversarialObjective::AdversarialObjective(int d, double mu, double c,
                                           double mu_v, double rho, double R,
                                           double data_radius)
    : d_(d),
      mu_(mu),
      c_(c),
      mu_v_(mu_v),
      rho_(rho),
      R_(R),
      data_radius_(data_radius) {
  if (d < 1 || !(mu >= 0.0) || !(mu_v >= 0.0) || !(rho >= 0.0) ||
      !(R > 0.0) || !(data_radius >= 0.0) || !std::isfinite(c)) {
    throw InvalidArgumentError("AdversarialObjective: invalid parameters");
  }
}

FunctionClassSpec AdversarialObjective::Spec(int n) const {
  FunctionClassSpec s;
  s.L = mu_ * R_ + data_radius_ + std::abs(c_) * 0.5 * rho_;
  s.mu = mu_;
  s.beta = mu_;
  s.R = R_;
  s.n = n;
  s.d = d_;
  s.erm = true;
  return s;
}

double AdversarialObjective::H(const Vector& w, const Matrix& v,
                               const Dataset& x) const {
  const int n = x.size();
  const Vector xbar = Mean(x);
  const Vector vbar = v.colwise().mean().transpose();
  const double v_sq = v.rowwise().squaredNorm().sum() / n;
  return 0.5 * mu_ * w.squaredNorm() + w.dot(xbar) + c_ * w.dot(vbar) -
         0.5 * mu_v_ * v_sq;
}

Vector AdversarialObjective::GradW(const Vector& w, const Matrix& v,
                                   const Dataset& x) const {
  return mu_ * w + Mean(x) + c_ * v.colwise().mean().transpose();
}

Matrix AdversarialObjective::GradV(const Vector& w, const Matrix& v,
                                   const Dataset& x) const {
  Matrix g(x.size(), d_);
  for (int i = 0; i < x.size(); ++i) {
    g.row(i) = (c_ * w - mu_v_ * v.row(i).transpose()).transpose();
  }
  return g;
}

Matrix AdversarialObjective::ProjectV(const Matrix& v) const {
  Matrix out(v.rows(), v.cols());
  if (rho_ == 0.0) return Matrix::Zero(v.rows(), v.cols());
  for (int i = 0; i < v.rows(); ++i) {
    out.row(i) = ProjectBall(Vector(v.row(i).transpose()), 0.5 * rho_)
                     .transpose();
  }
  return out;
}

Matrix AdversarialObjective::BestResponse(const Vector& w,
                                          const Dataset& x) const {
  Vector v = Vector::Zero(d_);
  const double radius = 0.5 * rho_;
  if (radius > 0.0) {
    if (mu_v_ > 0.0) {
      v = ProjectBall(Vector(c_ * w / mu_v_), radius);
    } else {
      const double norm = w.norm();
      if (norm > 0.0 && c_ != 0.0) v = (c_ > 0 ? radius : -radius) * w / norm;
    }
  }
  return v.transpose().replicate(x.size(), 1);
}

double AdversarialObjective::Phi(double s) const {
  const double r = 0.5 * rho_;
  const double a = std::abs(c_) * s;
  if (mu_v_ > 0.0 && a / mu_v_ <= r) return a * a / (2.0 * mu_v_);
  return r * a - 0.5 * mu_v_ * r * r;
}

double AdversarialObjective::PhiPrime(double s) const {
  const double r = 0.5 * rho_;
  const double a = std::abs(c_) * s;
  if (mu_v_ > 0.0) return std::abs(c_) * std::min(a / mu_v_, r);
  return std::abs(c_) * r;
}

double AdversarialObjective::G(const Vector& w, const Dataset& x) const {
  return 0.5 * mu_ * w.squaredNorm() + w.dot(Mean(x)) + Phi(w.norm());
}

Vector AdversarialObjective::GradG(const Vector& w, const Dataset& x) const {
  Vector g = mu_ * w + Mean(x);
  const double norm = w.norm();
  if (norm > 0.0) g += PhiPrime(norm) * w / norm;
  return g;
}

Vector AdversarialObjective::MinimizeW(const Matrix& v,
                                       const Dataset& x) const {
  const Vector u = Mean(x) + c_ * v.colwise().mean().transpose();
  if (mu_ > 0.0) return ProjectBall(Vector(-u / mu_), R_);
  const double norm = u.norm();
  if (norm == 0.0) return Vector::Zero(d_);
  return -R_ * u / norm;
}

Vector AdversarialObjective::MinimizeG(const Dataset& x) const {
  if (!(mu_ > 0.0)) {
    throw UnsupportedError("MinimizeG: requires mu > 0");
  }
  const Vector xbar = Mean(x);
  const double b = xbar.norm();
  // Derivative along -xbar: mu s - b + phi'(s); increasing in s.
  auto deriv = [&](double s) { return mu_ * s - b + PhiPrime(s); };
  if (b == 0.0 || deriv(0.0) >= 0.0) return Vector::Zero(d_);
  double lo = 0.0;
  double hi = b / mu_;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (deriv(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return -(0.5 * (lo + hi)) * xbar / b;
}

ObjectivePtr AdversarialObjective::Unperturbed() const {
  return std::make_shared<LinearQuadratic>(d_, mu_, R_, data_radius_);
}

}  // namespace dpop
