#ifndef DPOP_CORE_H_
#define DPOP_CORE_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpop {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

using Rng = std::mt19937_64;

class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A theorem hypothesis does not hold for the requested parameters.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// (epsilon, delta) with c_delta cached at construction.
class PrivacyParams {
 public:
  PrivacyParams(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  bool pure() const { return delta_ == 0.0; }
  // Only meaningful when delta > 0.
  double c_delta() const { return c_delta_; }
  // sqrt(d) (c_delta + sqrt(c_delta^2 + eps)) / eps for delta > 0, d / eps
  // for delta = 0. Every risk formula is written in terms of this ratio.
  double DimensionRatio(int d) const;

 private:
  double epsilon_;
  double delta_;
  double c_delta_ = 0.0;
};

struct FunctionClassSpec {
  double L = 1.0;
  double mu = 0.0;
  double beta = 0.0;
  double R = 1.0;
  int n = 1;
  int d = 1;
  bool erm = false;

  bool strongly_convex() const { return mu > 0.0; }
  bool smooth() const { return beta > 0.0; }
  // beta / mu; requires both positive.
  double kappa() const;
};

struct CheckedSpec {
  FunctionClassSpec spec;
  std::optional<double> kappa;
  std::vector<std::string> warnings;
};

// Throws InvalidArgumentError on nonpositive L, R, n, d, negative mu or beta,
// or beta < mu when both are positive.
CheckedSpec ValidateSpec(const FunctionClassSpec& spec);

// Ordered records, one per row. Labels are optional (size 0 when absent).
struct Dataset {
  Matrix points;
  Vector labels;

  int size() const { return static_cast<int>(points.rows()); }
  int record_dim() const { return static_cast<int>(points.cols()); }
  bool has_labels() const { return labels.size() > 0; }
  auto record(int i) const { return points.row(i).transpose(); }
};

// Replaces record `index` (and its label, when present).
Dataset AdjacentDataset(const Dataset& x, int index, const Vector& replacement,
                        std::optional<double> label = std::nullopt);

// Number of records that differ between two datasets of equal size.
int CountDifferingRecords(const Dataset& a, const Dataset& b);

// Euclidean projection onto B(0, radius): z / max{1, |z| / radius}.
template <typename Derived>
VectorX<typename Derived::Scalar> ProjectBall(
    const Eigen::MatrixBase<Derived>& w, typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  if (!(radius > Scalar(0))) {
    throw InvalidArgumentError("ProjectBall: radius must be positive");
  }
  if (!w.allFinite()) {
    throw InvalidArgumentError("ProjectBall: non-finite input");
  }
  const Scalar norm = w.norm();
  if (norm <= radius) return w;
  return w * (radius / norm);
}

// Projection onto the ball of the given radius centered at `center`.
template <typename DerivedW, typename DerivedC>
VectorX<typename DerivedW::Scalar> ProjectBall(
    const Eigen::MatrixBase<DerivedW>& w,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedW::Scalar radius) {
  return center + ProjectBall(w - center, radius);
}

// Independent generator for (seed, stream). Streams with distinct indices do
// not overlap in practice and the mapping is stable across runs.
Rng MakeRng(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace dpop

#endif  // DPOP_CORE_H_
