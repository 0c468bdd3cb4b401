#include "dpop/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dpop/core.h"

namespace dpop {

double Mean(const std::vector<double>& samples) {
  if (samples.empty()) throw InvalidArgumentError("mean of empty sample");
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double StdDev(const std::vector<double>& samples) {
  if (samples.size() < 2) return 0.0;
  const double m = Mean(samples);
  double ss = 0.0;
  for (double s : samples) ss += (s - m) * (s - m);
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

double Median(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgumentError("median of empty sample");
  const size_t mid = samples.size() / 2;
  std::nth_element(samples.begin(), samples.begin() + mid, samples.end());
  const double upper = samples[mid];
  if (samples.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(samples.begin(), samples.begin() + mid);
  return 0.5 * (lower + upper);
}

Summary Summarize(const std::vector<double>& samples) {
  Summary s;
  s.count = static_cast<int>(samples.size());
  s.mean = Mean(samples);
  s.std = StdDev(samples);
  s.median = Median(samples);
  const double half = kZ99 * s.std / std::sqrt(static_cast<double>(s.count));
  s.ci99_lower = s.mean - half;
  s.ci99_upper = s.mean + half;
  return s;
}

TestResult KsTest(std::vector<double> samples,
                  const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgumentError("KS test on empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  // Asymptotic Kolmogorov series with the Stephens correction.
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double q = 0.0;
  if (lambda < 0.2) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      q += (k % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

TestResult ChiSquareTest(const std::vector<long long>& observed,
                         const std::vector<double>& probabilities,
                         double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw InvalidArgumentError("chi-square: size mismatch");
  }
  const double total = static_cast<double>(
      std::accumulate(observed.begin(), observed.end(), 0LL));
  double stat = 0.0;
  int cells = 0;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probabilities[i];
    if (e < min_expected) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += e;
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++cells;
  }
  if (cells < 2) return {stat, 1.0};
  boost::math::chi_squared dist(cells - 1);
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

double GammaCdf(double shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgumentError("slope needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace dpop
