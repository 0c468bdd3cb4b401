#include "dpop/noise.h"

#include <algorithm>
#include <cmath>

namespace dpop {

double CDelta(double delta) {
  if (!(delta > 0.0) || !(delta < 0.5)) {
    throw InvalidArgumentError("CDelta: delta must lie in (0, 1/2)");
  }
  return std::sqrt(std::log(2.0 / (std::sqrt(16.0 * delta + 1.0) - 1.0)));
}

double GaussianSigma(const PrivacyParams& privacy, double sensitivity) {
  if (privacy.pure()) {
    throw UnsupportedError("GaussianSigma: delta = 0 requires GammaNorm noise");
  }
  if (!(sensitivity > 0.0)) {
    throw InvalidArgumentError("GaussianSigma: sensitivity must be positive");
  }
  const double c = privacy.c_delta();
  const double eps = privacy.epsilon();
  return (c + std::sqrt(c * c + eps)) / (std::sqrt(2.0) * eps) * sensitivity;
}

double ClassicalGaussianSigma(double epsilon, double delta,
                              double sensitivity) {
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
}

NoiseSpec CalibrateNoise(const PrivacyParams& privacy, double sensitivity,
                         int d) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw InvalidArgumentError("CalibrateNoise: sensitivity must be positive");
  }
  if (d < 1) throw InvalidArgumentError("CalibrateNoise: d must be positive");
  NoiseSpec spec;
  spec.d = d;
  spec.epsilon = privacy.epsilon();
  spec.delta = privacy.delta();
  spec.sensitivity = sensitivity;
  if (privacy.pure()) {
    spec.kind = NoiseKind::kGammaNorm;
    spec.scale = sensitivity / privacy.epsilon();
  } else {
    spec.kind = NoiseKind::kGaussian;
    spec.scale = GaussianSigma(privacy, sensitivity);
  }
  return spec;
}

double LogDensity(const NoiseSpec& spec, const Vector& t) {
  if (t.size() != spec.d) {
    throw InvalidArgumentError("LogDensity: dimension mismatch");
  }
  if (spec.kind == NoiseKind::kGammaNorm) return -t.norm() / spec.scale;
  return -t.squaredNorm() / (2.0 * spec.scale * spec.scale);
}

double PrivacyRatioCheck(const NoiseSpec& spec, double shift,
                         const std::vector<Vector>& probes) {
  if (spec.kind != NoiseKind::kGammaNorm) {
    throw UnsupportedError("PrivacyRatioCheck: GammaNorm spec required");
  }
  if (!(shift >= 0.0) || shift > spec.sensitivity) {
    throw InvalidArgumentError(
        "PrivacyRatioCheck: shift must lie in [0, sensitivity]");
  }
  Vector c2 = Vector::Zero(spec.d);
  c2(0) = shift;
  double worst = 0.0;
  for (const Vector& t : probes) {
    const double ratio = LogDensity(spec, t) - LogDensity(spec, t - c2);
    worst = std::max(worst, std::abs(ratio));
  }
  return worst;
}

}  // namespace dpop
