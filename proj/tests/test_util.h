#ifndef DPOP_TESTS_TEST_UTIL_H_
#define DPOP_TESTS_TEST_UTIL_H_

#include <cmath>
#include <functional>
#include <initializer_list>

#include "dpop/core.h"
#include "dpop/noise.h"

namespace dpop::testing {

inline Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vector UniformBallPoint(int d, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return SampleUnitSphere(d, rng) * (radius * std::pow(unit(rng), 1.0 / d));
}

inline Dataset UniformBallData(int n, int d, double radius, Rng& rng) {
  Dataset x;
  x.points.resize(n, d);
  for (int i = 0; i < n; ++i) {
    x.points.row(i) = UniformBallPoint(d, radius, rng).transpose();
  }
  return x;
}

// Features in B(0, radius) with random +-1 labels.
inline Dataset LabeledData(int n, int d, double radius, Rng& rng) {
  Dataset x = UniformBallData(n, d, radius, rng);
  std::bernoulli_distribution coin(0.5);
  x.labels.resize(n);
  for (int i = 0; i < n; ++i) x.labels(i) = coin(rng) ? 1.0 : -1.0;
  return x;
}

// Central differences with step h.
inline Vector NumericGradient(const std::function<double(const Vector&)>& f,
                              const Vector& w, double h) {
  Vector g(w.size());
  for (int i = 0; i < w.size(); ++i) {
    Vector up = w;
    Vector down = w;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

}  // namespace dpop::testing

#endif  // DPOP_TESTS_TEST_UTIL_H_
