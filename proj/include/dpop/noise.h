#ifndef DPOP_NOISE_H_
#define DPOP_NOISE_H_

#include <random>
#include <vector>

#include "dpop/core.h"

namespace dpop {

enum class NoiseKind { kGammaNorm, kGaussian };

// GammaNorm: density proportional to exp(-|t| / scale), so |z| ~ Gamma(d,
// scale) with scale = sensitivity / epsilon. Gaussian: N(0, scale^2 I).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGammaNorm;
  int d = 1;
  double scale = 1.0;
  double epsilon = 1.0;
  double delta = 0.0;
  double sensitivity = 1.0;
};

// sqrt(log(2 / (sqrt(16 delta + 1) - 1))) for delta in (0, 1/2).
double CDelta(double delta);

// Per-coordinate standard deviation for (epsilon, delta)-DP at the given L2
// sensitivity; valid for every epsilon > 0.
double GaussianSigma(const PrivacyParams& privacy, double sensitivity);

// sqrt(2 log(1.25 / delta)) sensitivity / epsilon; kept for comparison only.
double ClassicalGaussianSigma(double epsilon, double delta, double sensitivity);

// GammaNorm when delta = 0, Gaussian otherwise.
NoiseSpec CalibrateNoise(const PrivacyParams& privacy, double sensitivity,
                         int d);

// Uniform direction on the unit sphere (normalized standard normal vector).
template <typename Scalar = double>
VectorX<Scalar> SampleUnitSphere(int d, Rng& rng) {
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  VectorX<Scalar> g(d);
  Scalar norm = Scalar(0);
  while (!(norm > Scalar(0))) {
    for (int i = 0; i < d; ++i) g(i) = normal(rng);
    norm = g.norm();
  }
  return g / norm;
}

template <typename Scalar = double>
VectorX<Scalar> SampleNoise(const NoiseSpec& spec, Rng& rng) {
  if (spec.kind == NoiseKind::kGammaNorm) {
    std::gamma_distribution<Scalar> radius(Scalar(spec.d), Scalar(spec.scale));
    const Scalar r = radius(rng);
    return SampleUnitSphere<Scalar>(spec.d, rng) * r;
  }
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(spec.scale));
  VectorX<Scalar> z(spec.d);
  for (int i = 0; i < spec.d; ++i) z(i) = normal(rng);
  return z;
}

// Unnormalized log-density: -|t| / scale or -|t|^2 / (2 scale^2).
double LogDensity(const NoiseSpec& spec, const Vector& t);

// Max over probes of |log p(t - c1) - log p(t - c2)| with c1 = 0 and
// c2 = shift * e1. Requires a GammaNorm spec and shift <= sensitivity.
double PrivacyRatioCheck(const NoiseSpec& spec, double shift,
                         const std::vector<Vector>& probes);

}  // namespace dpop

#endif  // DPOP_NOISE_H_
