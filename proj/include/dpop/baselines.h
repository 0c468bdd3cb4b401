#ifndef DPOP_BASELINES_H_
#define DPOP_BASELINES_H_

#include "dpop/core.h"
#include "dpop/objectives.h"

namespace dpop {

// Axis-aligned grid on the ball B(center, radius) intersected with
// B(0, outer_radius), d in {1, 2}.
struct GridSpec {
  int d = 1;
  int resolution = 129;
  double radius = 1.0;
  Vector center;
  double outer_radius = 1.0;

  static GridSpec Ball(int d, int resolution, double R);
  static GridSpec Localized(const Vector& center, double radius, double R,
                            int resolution);
};

// Throws UnsupportedError for d > 2 and InvalidArgumentError for
// resolution < 64.
void ValidateGrid(const GridSpec& grid);
// One point per row.
Matrix GridPoints(const GridSpec& grid);
double GridSpacing(const GridSpec& grid);

struct ExpMechResult {
  Matrix points;
  Vector probabilities;
  int index = 0;
  Vector w;
  double epsilon = 0.0;
  // Grid spacing times L.
  double discretization_error = 0.0;
};

// Probabilities proportional to exp(-eps F / (4 L radius)), max-shifted.
Vector ExponentialWeights(const Objective& obj, const Dataset& x,
                          const Matrix& points, double eps, double L,
                          double radius);

// One categorical draw over the grid. L comes from the declared spec and the
// weight radius is the grid radius.
ExpMechResult ExponentialMechanism(const Objective& obj, const Dataset& x,
                                   const GridSpec& grid, double eps,
                                   Rng& rng);

struct LocalizationResult {
  Vector w_star;
  Vector w0;
  double radius = 0.0;
  double sensitivity = 0.0;
  double xi = 0.0;
  bool captured = false;
};

// xi Delta d / eps.
double LocalizationRadius(double sensitivity, int d, double eps, double xi);

// w0 = Pi(w* + z), z ~ GammaNorm(Delta_F, eps); returns the ball around w0 of
// radius xi Delta_F d / eps. Requires mu > 0.
LocalizationResult Localization(const Objective& obj, const Dataset& x,
                                double eps, double xi, Rng& rng);

struct ExpLocResult {
  LocalizationResult localization;
  ExpMechResult sample;
  double epsilon_localization = 0.0;
  double epsilon_sampling = 0.0;
  double epsilon_total = 0.0;
};

// log(eps^2 mu R / (d L)).
double ExpLocXi(const FunctionClassSpec& spec, double eps);
// (L^2/mu)(d/eps)^2 log(eps^2 mu R / (d L)).
double ExpLocRiskScale(const FunctionClassSpec& spec, double eps);
// d mu R >= 2L and eps > d.
bool ExpLocRegimeHolds(const FunctionClassSpec& spec, double eps);

// Localization at eps/2 followed by the grid exponential mechanism at eps/2
// over the localized ball. Throws RegimeError outside the regime unless
// force.
ExpLocResult ExpPlusLocalization(const Objective& obj, const Dataset& x,
                                 double eps, int resolution, Rng& rng,
                                 bool force = false);

}  // namespace dpop

#endif  // DPOP_BASELINES_H_
