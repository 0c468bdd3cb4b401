#include "dpop/optimizers.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace dpop {
namespace {

Vector StartPoint(const std::optional<Vector>& w0, int d, double R) {
  if (!w0.has_value()) return Vector::Zero(d);
  if (w0->size() != d) throw InvalidArgumentError("w0 dimension mismatch");
  return ProjectBall(*w0, R);
}

void CheckFinite(const Vector& g, double best) {
  if (!g.allFinite()) {
    throw ConvergenceError("non-finite subgradient", best);
  }
}

// Norm in the metric |w|^2 + (1/n) sum_i |v_i|^2.
double SaddleNorm(const Vector& w, const Matrix& v) {
  const double n = static_cast<double>(v.rows());
  return std::sqrt(w.squaredNorm() + v.squaredNorm() / n);
}

Vector RandomInBall(int d, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector g(d);
  for (int i = 0; i < d; ++i) g(i) = normal(rng);
  const double norm = g.norm();
  if (norm == 0.0) return Vector::Zero(d);
  return g / norm * radius * std::pow(unit(rng), 1.0 / d);
}

// Largest observed |F(z1) - F(z2)| / |z1 - z2| for the saddle operator
// F = (grad_w H, -grad_v h_i) over random feasible pairs.
double EstimateOperatorLipschitz(const AdversarialObjective& obj,
                                 const Dataset& x, Rng& rng) {
  constexpr int kPairs = 64;
  const int n = x.size();
  const int d = obj.dim();
  const double v_radius = 0.5 * obj.rho();
  double best = std::max(obj.mu(), obj.mu_v());
  for (int k = 0; k < kPairs; ++k) {
    const Vector w1 = RandomInBall(d, obj.R(), rng);
    const Vector w2 = RandomInBall(d, obj.R(), rng);
    Matrix v1 = Matrix::Zero(n, d);
    Matrix v2 = Matrix::Zero(n, d);
    if (v_radius > 0.0) {
      for (int i = 0; i < n; ++i) {
        v1.row(i) = RandomInBall(d, v_radius, rng).transpose();
        v2.row(i) = RandomInBall(d, v_radius, rng).transpose();
      }
    }
    const double dz = SaddleNorm(w1 - w2, v1 - v2);
    if (dz == 0.0) continue;
    const Vector dgw = obj.GradW(w1, v1, x) - obj.GradW(w2, v2, x);
    const Matrix dgv = obj.GradV(w1, v1, x) - obj.GradV(w2, v2, x);
    best = std::max(best, SaddleNorm(dgw, dgv) / dz);
  }
  return best;
}

}  // namespace

std::string OptimizerName(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSubgradient:
      return "subgradient";
    case OptimizerKind::kStochasticSubgradient:
      return "sgd";
    case OptimizerKind::kAgd:
      return "agd";
    case OptimizerKind::kKatyusha:
      return "katyusha";
    case OptimizerKind::kExtragradient:
      return "extragradient";
    case OptimizerKind::kExact:
      return "exact";
  }
  return "unknown";
}

OptimizerKind ParseOptimizer(const std::string& name) {
  if (name == "subgradient") return OptimizerKind::kSubgradient;
  if (name == "sgd") return OptimizerKind::kStochasticSubgradient;
  if (name == "agd") return OptimizerKind::kAgd;
  if (name == "katyusha") return OptimizerKind::kKatyusha;
  if (name == "extragradient") return OptimizerKind::kExtragradient;
  if (name == "exact") return OptimizerKind::kExact;
  throw InvalidArgumentError("unknown optimizer: " + name);
}

int SubgradientIterations(double L, double mu, double alpha) {
  if (!(mu > 0.0) || !(alpha > 0.0)) {
    throw InvalidArgumentError("SubgradientIterations: mu, alpha must be > 0");
  }
  const double t = std::ceil(2.0 * L * L / (mu * alpha));
  if (t > std::numeric_limits<int>::max()) {
    throw InvalidArgumentError("SubgradientIterations: T overflows");
  }
  return std::max(1, static_cast<int>(t));
}

int AgdIterations(double mu, double beta, double R, double alpha) {
  if (!(mu > 0.0) || !(beta >= mu) || !(alpha > 0.0)) {
    throw InvalidArgumentError("AgdIterations: need beta >= mu > 0, alpha > 0");
  }
  const double t =
      std::sqrt(beta / mu) * std::log((mu + beta) * R * R / (2.0 * alpha));
  return std::max(0, static_cast<int>(std::ceil(t)));
}

int KatyushaEpochs(int n, double kappa, double gap0, double alpha) {
  if (n < 1 || !(kappa >= 1.0) || !(alpha > 0.0)) {
    throw InvalidArgumentError("KatyushaEpochs: invalid arguments");
  }
  if (!(gap0 > 0.0)) return 1;
  const double rate = 4.0 + std::sqrt(3.0 * kappa / (2.0 * n));
  const double t = rate * std::log(4.0 * gap0 / alpha);
  return std::max(1, static_cast<int>(std::ceil(t)));
}

OptResult SubgradientMethod(const Objective& obj, const Dataset& x, int T,
                            const OptOptions& options) {
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (!(spec.mu > 0.0)) {
    throw UnsupportedError("SubgradientMethod: requires mu > 0");
  }
  if (T < 1) throw InvalidArgumentError("SubgradientMethod: T must be >= 1");
  Vector w = StartPoint(options.w0, obj.dim(), spec.R);
  OptResult result;
  result.value = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= T; ++t) {
    const Vector g = obj.Subgradient(w, x);
    CheckFinite(g, result.value);
    const double eta = 2.0 / (spec.mu * t);
    w = ProjectBall(Vector(w - eta * g), spec.R);
    const double value = obj.Value(w, x);
    if (options.record_trace) result.trace.push_back(value);
    if (value < result.value) {
      result.value = value;
      result.w = w;
    }
  }
  result.iterations = T;
  return result;
}

OptResult StochasticSubgradient(const Objective& obj, const Dataset& x, int T,
                                Rng& rng, const OptOptions& options) {
  if (!obj.is_erm()) {
    throw UnsupportedError("StochasticSubgradient: objective must be ERM");
  }
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (!(spec.mu > 0.0)) {
    throw UnsupportedError("StochasticSubgradient: requires mu > 0");
  }
  if (T < 1) throw InvalidArgumentError("StochasticSubgradient: T must be >= 1");
  std::uniform_int_distribution<int> pick(0, x.size() - 1);
  Vector w = StartPoint(options.w0, obj.dim(), spec.R);
  Vector avg = Vector::Zero(obj.dim());
  const double denom = static_cast<double>(T) * (T + 1.0);
  OptResult result;
  for (int t = 1; t <= T; ++t) {
    const Vector g = obj.SampleGradient(w, x, pick(rng));
    CheckFinite(g, std::numeric_limits<double>::quiet_NaN());
    const double eta = 2.0 / (spec.mu * t);
    w = ProjectBall(Vector(w - eta * g), spec.R);
    avg += (2.0 * t / denom) * w;
    if (options.record_trace) result.trace.push_back(obj.Value(w, x));
  }
  result.w = avg;
  result.value = obj.Value(avg, x);
  result.iterations = T;
  return result;
}

OptResult Agd(const Objective& obj, const Dataset& x, int T,
              const OptOptions& options) {
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (!(spec.beta > 0.0)) throw UnsupportedError("Agd: requires beta > 0");
  if (!(spec.mu > 0.0)) throw UnsupportedError("Agd: requires mu > 0");
  if (T < 0) throw InvalidArgumentError("Agd: T must be >= 0");
  const double sk = std::sqrt(spec.beta / spec.mu);
  const double momentum = (sk - 1.0) / (sk + 1.0);
  Vector w = StartPoint(options.w0, obj.dim(), spec.R);
  Vector y_prev = w;
  OptResult result;
  for (int t = 1; t <= T; ++t) {
    const Vector g = obj.Subgradient(w, x);
    CheckFinite(g, std::numeric_limits<double>::quiet_NaN());
    const Vector y = ProjectBall(Vector(w - g / spec.beta), spec.R);
    w = (1.0 + momentum) * y - momentum * y_prev;
    y_prev = y;
    if (options.record_trace) result.trace.push_back(obj.Value(y, x));
  }
  result.w = y_prev;
  result.value = obj.Value(result.w, x);
  result.iterations = T;
  return result;
}

OptResult Fista(const Objective& obj, const Dataset& x, int T,
                const OptOptions& options) {
  constexpr int kStallWindow = 25;
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (!(spec.beta > 0.0)) throw UnsupportedError("Fista: requires beta > 0");
  Vector w = StartPoint(options.w0, obj.dim(), spec.R);
  Vector y = w;
  double t = 1.0;
  double value = obj.Value(w, x);
  int stall = 0;
  OptResult result;
  int iter = 0;
  for (iter = 1; iter <= T; ++iter) {
    const Vector g = obj.Subgradient(y, x);
    CheckFinite(g, value);
    const Vector w_next = ProjectBall(Vector(y - g / spec.beta), spec.R);
    const double next_value = obj.Value(w_next, x);
    if (next_value > value) {
      // Function-value restart.
      t = 1.0;
      y = w;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = w_next + ((t - 1.0) / t_next) * (w_next - w);
    t = t_next;
    const double improvement = value - next_value;
    w = w_next;
    value = next_value;
    if (options.record_trace) result.trace.push_back(value);
    if (improvement <= 1e-16 * std::max(1.0, std::abs(value))) {
      if (++stall >= kStallWindow) break;
    } else {
      stall = 0;
    }
  }
  result.w = w;
  result.value = value;
  result.iterations = std::min(iter, T);
  return result;
}

OptResult Katyusha(const Objective& obj, const Dataset& x, int epochs,
                   Rng& rng, const OptOptions& options) {
  if (!obj.is_erm()) throw UnsupportedError("Katyusha: objective must be ERM");
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (!(spec.mu > 0.0) || !(spec.beta > 0.0)) {
    throw UnsupportedError("Katyusha: requires mu > 0 and beta > 0");
  }
  if (epochs < 0) throw InvalidArgumentError("Katyusha: epochs must be >= 0");
  const int n = x.size();
  const int m = 2 * n;
  const double mu = spec.mu;
  const double beta = spec.beta;
  const double tau2 = 0.5;
  const double tau1 = std::min(std::sqrt(m * mu) / std::sqrt(3.0 * beta), 0.5);
  const double gamma = 1.0 / (3.0 * tau1 * beta);
  // Weights (1 + gamma mu)^j normalized by the largest one.
  Vector weights(m);
  const double log_ratio = std::log1p(gamma * mu);
  for (int j = 0; j < m; ++j) weights(j) = std::exp((j - (m - 1)) * log_ratio);
  weights /= weights.sum();

  auto grad_g = [&](const Vector& w, int i) {
    return Vector(obj.SampleGradient(w, x, i) - mu * w);
  };
  std::uniform_int_distribution<int> pick(0, n - 1);
  Vector anchor = options.w0.has_value() ? *options.w0 : Vector::Zero(obj.dim());
  Vector y = anchor;
  Vector z = anchor;
  OptResult result;
  for (int t = 0; t < epochs; ++t) {
    const Vector full = obj.Subgradient(anchor, x) - mu * anchor;
    Vector next_anchor = Vector::Zero(obj.dim());
    for (int j = 0; j < m; ++j) {
      const Vector wk = tau1 * z + tau2 * anchor + (1.0 - tau1 - tau2) * y;
      const int i = pick(rng);
      const Vector g = full + grad_g(wk, i) - grad_g(anchor, i);
      CheckFinite(g, std::numeric_limits<double>::quiet_NaN());
      z = (z - gamma * g) / (1.0 + gamma * mu);
      y = (3.0 * beta * wk - g) / (3.0 * beta + mu);
      next_anchor += weights(j) * y;
    }
    anchor = next_anchor;
    if (options.record_trace) result.trace.push_back(obj.Value(anchor, x));
  }
  result.w = anchor;
  result.value = obj.Value(anchor, x);
  result.iterations = epochs;
  return result;
}

double DualityGap(const AdversarialObjective& obj, const Dataset& x,
                  const Vector& w, const Matrix& v) {
  const double upper = obj.G(w, x);
  const Vector w_min = obj.MinimizeW(v, x);
  const double lower = obj.H(w_min, v, x);
  return std::max(0.0, upper - lower);
}

OptResult ExtragradientSaddle(const AdversarialObjective& obj,
                              const Dataset& x, double target_alpha,
                              int max_iters, Rng& rng,
                              const SaddleOptions& options) {
  constexpr int kStallChecks = 20;
  if (!(target_alpha > 0.0)) {
    throw InvalidArgumentError("ExtragradientSaddle: target_alpha must be > 0");
  }
  const int n = x.size();
  const int d = obj.dim();
  Vector w = options.w0.has_value() ? ProjectBall(*options.w0, obj.R())
                                    : Vector::Zero(d);
  Matrix v = options.v0.has_value() ? obj.ProjectV(*options.v0)
                                    : Matrix::Zero(n, d);
  double step = 0.5 / EstimateOperatorLipschitz(obj, x, rng);

  OptResult result;
  result.w = w;
  result.v = v;
  result.gap = DualityGap(obj, x, w, v);
  if (options.record_trace) result.gap_trace.push_back(result.gap);
  if (result.gap <= target_alpha) {
    result.value = obj.G(w, x);
    return result;
  }
  Vector w_sum = Vector::Zero(d);
  Matrix v_sum = Matrix::Zero(n, d);
  int avg_count = 0;
  double stall_best = result.gap;
  int stall = 0;
  for (int k = 1; k <= max_iters; ++k) {
    const Vector gw = obj.GradW(w, v, x);
    const Matrix gv = obj.GradV(w, v, x);
    const Vector w_half = ProjectBall(Vector(w - step * gw), obj.R());
    const Matrix v_half = obj.ProjectV(v + step * gv);
    const Vector gw2 = obj.GradW(w_half, v_half, x);
    const Matrix gv2 = obj.GradV(w_half, v_half, x);
    w = ProjectBall(Vector(w - step * gw2), obj.R());
    v = obj.ProjectV(v + step * gv2);
    w_sum += w_half;
    v_sum += v_half;
    ++avg_count;
    if (k % options.check_every != 0 && k != max_iters) continue;

    const double gap_last = DualityGap(obj, x, w, v);
    const Vector w_avg = w_sum / avg_count;
    const Matrix v_avg = v_sum / avg_count;
    const double gap_avg = DualityGap(obj, x, w_avg, v_avg);
    const bool use_avg = gap_avg < gap_last;
    const double gap = use_avg ? gap_avg : gap_last;
    if (options.record_trace) result.gap_trace.push_back(gap);
    if (gap < result.gap) {
      result.gap = gap;
      result.w = use_avg ? w_avg : w;
      result.v = use_avg ? v_avg : v;
    }
    result.iterations = k;
    if (result.gap <= target_alpha) {
      result.value = obj.G(result.w, x);
      return result;
    }
    if (result.gap < 0.99 * stall_best) {
      stall_best = result.gap;
      stall = 0;
    } else if (++stall >= kStallChecks) {
      step *= 0.5;
      w_sum.setZero();
      v_sum.setZero();
      avg_count = 0;
      stall = 0;
      stall_best = result.gap;
    }
  }
  throw ConvergenceError("ExtragradientSaddle: duality gap target not reached",
                         result.gap);
}

Vector ReferenceMinimizer(const Objective& obj, const Dataset& x) {
  if (obj.has_exact_minimizer()) return obj.ExactMinimizer(x);
  if (obj.has_reference_minimizer()) return obj.ReferenceMinimizer(x);
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (spec.beta > 0.0) {
    return Fista(obj, x, 200000).w;
  }
  if (spec.mu > 0.0) {
    return SubgradientMethod(obj, x, 200000).w;
  }
  throw UnsupportedError(obj.name() + ": no reference solver for non-smooth "
                         "convex losses without a dedicated minimizer");
}

void WriteTrace(const std::string& path, const OptResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "iter,value,gap\n";
  out.precision(17);
  const size_t rows = std::max(result.trace.size(), result.gap_trace.size());
  for (size_t i = 0; i < rows; ++i) {
    out << i + 1 << ',';
    if (i < result.trace.size()) out << result.trace[i];
    out << ',';
    if (i < result.gap_trace.size()) out << result.gap_trace[i];
    out << '\n';
  }
}

}  // namespace dpop
