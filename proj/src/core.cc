#include "dpop/core.h"

#include "dpop/noise.h"

namespace dpop {

PrivacyParams::PrivacyParams(double epsilon, double delta)
    : epsilon_(epsilon), delta_(delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgumentError("PrivacyParams: epsilon must be positive");
  }
  if (!(delta >= 0.0) || !(delta < 0.5)) {
    throw InvalidArgumentError("PrivacyParams: delta must lie in [0, 1/2)");
  }
  if (delta > 0.0) c_delta_ = CDelta(delta);
}

double PrivacyParams::DimensionRatio(int d) const {
  if (pure()) return d / epsilon_;
  return std::sqrt(static_cast<double>(d)) *
         (c_delta_ + std::sqrt(c_delta_ * c_delta_ + epsilon_)) / epsilon_;
}

double FunctionClassSpec::kappa() const {
  if (!(mu > 0.0) || !(beta > 0.0)) {
    throw UnsupportedError("kappa requires mu > 0 and beta > 0");
  }
  return beta / mu;
}

CheckedSpec ValidateSpec(const FunctionClassSpec& spec) {
  if (!(spec.L > 0.0)) throw InvalidArgumentError("L must be positive");
  if (!(spec.R > 0.0)) throw InvalidArgumentError("R must be positive");
  if (spec.n < 1) throw InvalidArgumentError("n must be positive");
  if (spec.d < 1) throw InvalidArgumentError("d must be positive");
  if (spec.mu < 0.0) throw InvalidArgumentError("mu must be nonnegative");
  if (spec.beta < 0.0) throw InvalidArgumentError("beta must be nonnegative");
  CheckedSpec out{spec, std::nullopt, {}};
  if (spec.mu > 0.0 && spec.beta > 0.0) {
    if (spec.beta < spec.mu) {
      throw InvalidArgumentError("beta must be at least mu (kappa >= 1)");
    }
    out.kappa = spec.beta / spec.mu;
  }
  if (spec.beta > 0.0 && spec.L > 2.0 * spec.beta * spec.R) {
    out.warnings.push_back("L exceeds 2 beta R");
  }
  return out;
}

Dataset AdjacentDataset(const Dataset& x, int index, const Vector& replacement,
                        std::optional<double> label) {
  if (index < 0 || index >= x.size()) {
    throw InvalidArgumentError("AdjacentDataset: index out of range");
  }
  if (replacement.size() != x.record_dim()) {
    throw InvalidArgumentError("AdjacentDataset: record dimension mismatch");
  }
  Dataset out = x;
  out.points.row(index) = replacement.transpose();
  if (label.has_value()) {
    if (!x.has_labels()) {
      throw InvalidArgumentError("AdjacentDataset: dataset has no labels");
    }
    out.labels(index) = *label;
  }
  return out;
}

int CountDifferingRecords(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size() || a.record_dim() != b.record_dim()) {
    throw InvalidArgumentError("CountDifferingRecords: shape mismatch");
  }
  int count = 0;
  for (int i = 0; i < a.size(); ++i) {
    bool same = (a.points.row(i).array() == b.points.row(i).array()).all();
    if (a.has_labels() && b.has_labels()) same = same && a.labels(i) == b.labels(i);
    if (!same) ++count;
  }
  return count;
}

Rng MakeRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x64706f70u};
  return Rng(seq);
}

}  // namespace dpop
