#include "dpop/baselines.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dpop/noise.h"
#include "dpop/optimizers.h"
#include "dpop/sensitivity.h"

namespace dpop {
namespace {

constexpr double kBallTolerance = 1e-12;

}  // namespace

GridSpec GridSpec::Ball(int d, int resolution, double R) {
  GridSpec g;
  g.d = d;
  g.resolution = resolution;
  g.radius = R;
  g.center = Vector::Zero(d);
  g.outer_radius = R;
  return g;
}

GridSpec GridSpec::Localized(const Vector& center, double radius, double R,
                             int resolution) {
  GridSpec g;
  g.d = static_cast<int>(center.size());
  g.resolution = resolution;
  g.radius = radius;
  g.center = center;
  g.outer_radius = R;
  return g;
}

void ValidateGrid(const GridSpec& grid) {
  if (grid.d > 2) {
    throw UnsupportedError("grid sampling supports d <= 2");
  }
  if (grid.d < 1) throw InvalidArgumentError("grid dimension must be >= 1");
  if (grid.resolution < 64) {
    throw InvalidArgumentError("grid resolution must be >= 64 per axis");
  }
  if (!(grid.radius > 0.0) || !(grid.outer_radius > 0.0)) {
    throw InvalidArgumentError("grid radii must be positive");
  }
  if (grid.center.size() != grid.d) {
    throw InvalidArgumentError("grid center dimension mismatch");
  }
}

double GridSpacing(const GridSpec& grid) {
  return 2.0 * grid.radius / (grid.resolution - 1);
}

Matrix GridPoints(const GridSpec& grid) {
  ValidateGrid(grid);
  const double h = GridSpacing(grid);
  std::vector<Vector> kept;
  auto keep = [&](const Vector& p) {
    if ((p - grid.center).norm() <= grid.radius * (1.0 + kBallTolerance) &&
        p.norm() <= grid.outer_radius * (1.0 + kBallTolerance)) {
      kept.push_back(p);
    }
  };
  const int m = grid.resolution;
  if (grid.d == 1) {
    for (int i = 0; i < m; ++i) {
      Vector p(1);
      p(0) = grid.center(0) - grid.radius + i * h;
      keep(p);
    }
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        Vector p(2);
        p(0) = grid.center(0) - grid.radius + i * h;
        p(1) = grid.center(1) - grid.radius + j * h;
        keep(p);
      }
    }
  }
  if (kept.empty()) {
    // The center lies in B(0, outer_radius) for localized grids.
    kept.push_back(ProjectBall(grid.center, grid.outer_radius));
  }
  Matrix points(static_cast<int>(kept.size()), grid.d);
  for (int i = 0; i < points.rows(); ++i) points.row(i) = kept[i].transpose();
  return points;
}

Vector ExponentialWeights(const Objective& obj, const Dataset& x,
                          const Matrix& points, double eps, double L,
                          double radius) {
  if (!(eps > 0.0) || !(L > 0.0) || !(radius > 0.0)) {
    throw InvalidArgumentError("exponential weights need eps, L, R > 0");
  }
  const int k = static_cast<int>(points.rows());
  Vector logits(k);
  const double scale = eps / (4.0 * L * radius);
  for (int i = 0; i < k; ++i) {
    logits(i) = -scale * obj.Value(points.row(i).transpose(), x);
  }
  const double shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp().matrix();
  return p / p.sum();
}

ExpMechResult ExponentialMechanism(const Objective& obj, const Dataset& x,
                                   const GridSpec& grid, double eps,
                                   Rng& rng) {
  const FunctionClassSpec spec = obj.Spec(x.size());
  ExpMechResult out;
  out.points = GridPoints(grid);
  out.probabilities =
      ExponentialWeights(obj, x, out.points, eps, spec.L, grid.radius);
  std::discrete_distribution<int> pick(
      out.probabilities.data(),
      out.probabilities.data() + out.probabilities.size());
  out.index = pick(rng);
  out.w = out.points.row(out.index).transpose();
  out.epsilon = eps;
  out.discretization_error = GridSpacing(grid) * spec.L;
  return out;
}

double LocalizationRadius(double sensitivity, int d, double eps, double xi) {
  return xi * sensitivity * d / eps;
}

LocalizationResult Localization(const Objective& obj, const Dataset& x,
                                double eps, double xi, Rng& rng) {
  if (!(xi > 0.0)) throw InvalidArgumentError("localization requires xi > 0");
  const FunctionClassSpec spec = obj.Spec(x.size());
  LocalizationResult out;
  out.sensitivity = ClassSensitivity(spec).value;
  out.xi = xi;
  out.w_star = ReferenceMinimizer(obj, x);
  const NoiseSpec noise =
      CalibrateNoise(PrivacyParams(eps, 0.0), out.sensitivity, spec.d);
  out.w0 = ProjectBall(out.w_star + SampleNoise<double>(noise, rng), spec.R);
  out.radius = LocalizationRadius(out.sensitivity, spec.d, eps, xi);
  out.captured = (out.w_star - out.w0).norm() <= out.radius;
  return out;
}

double ExpLocXi(const FunctionClassSpec& spec, double eps) {
  return std::log(eps * eps * spec.mu * spec.R / (spec.d * spec.L));
}

double ExpLocRiskScale(const FunctionClassSpec& spec, double eps) {
  const double r = spec.d / eps;
  return spec.L * spec.L / spec.mu * r * r * ExpLocXi(spec, eps);
}

bool ExpLocRegimeHolds(const FunctionClassSpec& spec, double eps) {
  return spec.d * spec.mu * spec.R >= 2.0 * spec.L && eps > spec.d;
}

ExpLocResult ExpPlusLocalization(const Objective& obj, const Dataset& x,
                                 double eps, int resolution, Rng& rng,
                                 bool force) {
  const FunctionClassSpec spec = obj.Spec(x.size());
  if (spec.d > 2) throw UnsupportedError("grid sampling supports d <= 2");
  if (!spec.strongly_convex()) {
    throw UnsupportedError("localization requires mu > 0");
  }
  if (!ExpLocRegimeHolds(spec, eps) && !force) {
    throw RegimeError("exp+loc requires d mu R >= 2L and eps > d");
  }
  const double xi = ExpLocXi(spec, eps);
  if (!(xi > 0.0)) {
    throw RegimeError("exp+loc requires eps^2 mu R > d L");
  }
  ExpLocResult out;
  out.epsilon_localization = eps / 2.0;
  out.epsilon_sampling = eps / 2.0;
  out.epsilon_total = out.epsilon_localization + out.epsilon_sampling;
  out.localization = Localization(obj, x, out.epsilon_localization, xi, rng);
  const GridSpec grid = GridSpec::Localized(
      out.localization.w0, out.localization.radius, spec.R, resolution);
  out.sample = ExponentialMechanism(obj, x, grid, out.epsilon_sampling, rng);
  return out;
}

}  // namespace dpop
