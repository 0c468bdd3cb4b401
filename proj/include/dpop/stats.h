#ifndef DPOP_STATS_H_
#define DPOP_STATS_H_

#include <functional>
#include <vector>

namespace dpop {

// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct Summary {
  int count = 0;
  double mean = 0.0;
  // Sample standard deviation (n - 1 denominator).
  double std = 0.0;
  double median = 0.0;
  double ci99_lower = 0.0;
  double ci99_upper = 0.0;
};

Summary Summarize(const std::vector<double>& samples);
double Mean(const std::vector<double>& samples);
double StdDev(const std::vector<double>& samples);
double Median(std::vector<double> samples);

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult KsTest(std::vector<double> samples,
                  const std::function<double(double)>& cdf);

// Pearson chi-square goodness of fit. Cells with expected count below
// min_expected are pooled into one cell.
TestResult ChiSquareTest(const std::vector<long long>& observed,
                         const std::vector<double>& probabilities,
                         double min_expected = 5.0);

// P(Gamma(shape, scale) <= x).
double GammaCdf(double shape, double scale, double x);

// Least-squares slope of log y against log x.
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dpop

#endif  // DPOP_STATS_H_
