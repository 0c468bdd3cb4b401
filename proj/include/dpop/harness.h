#ifndef DPOP_HARNESS_H_
#define DPOP_HARNESS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpop/core.h"
#include "dpop/mechanisms.h"
#include "dpop/objectives.h"
#include "dpop/stats.h"

namespace dpop {

enum class DistributionKind {
  kUniformBall,
  kUniformSphere,
  // x = M u with u uniform in B(0, radius).
  kPreimageBall,
  // center + u with u uniform in B(0, radius).
  kClustered,
  // N(0, sigma^2 I) projected onto B(0, radius).
  kGaussianProjected,
  kFixedList,
};

std::string DistributionName(DistributionKind kind);
DistributionKind ParseDistribution(const std::string& name);

struct DataDistribution {
  DistributionKind kind = DistributionKind::kUniformBall;
  int d = 1;
  double radius = 1.0;
  double sigma = 1.0;
  Matrix transform;
  Vector center;
  Matrix fixed;
  // Labels y in {-1, +1} with P(y = 1 | a) = 1 / (1 + exp(-a^T label_w)).
  std::optional<Vector> label_w;

  // Rows drawn independently (FixedList cycles through its rows).
  Dataset Sample(int n, Rng& rng) const;
};

// Privatized output for one trial.
using TrialMechanism = std::function<Vector(Rng& rng)>;
// Privatized output for a fresh dataset.
using DatasetMechanism = std::function<Vector(const Dataset& x, Rng& rng)>;

// Summary of sample(rng) over trials with streams MakeRng(seed, t).
Summary MonteCarloSummary(int trials, std::uint64_t seed,
                          const std::function<double(Rng&)>& sample);

// F(w_A, X) - f_star over trials with per-trial streams MakeRng(seed, t).
Summary EstimateExcessRisk(const TrialMechanism& mechanism,
                           const Objective& obj, const Dataset& x, int trials,
                           std::uint64_t seed, double f_star);
// f_star from the reference minimizer.
Summary EstimateExcessRisk(const TrialMechanism& mechanism,
                           const Objective& obj, const Dataset& x, int trials,
                           std::uint64_t seed);

// Each trial draws X ~ D^n, runs the mechanism, then estimates
// F(w, D) - F(w_pop, D) by the paired difference of per-sample losses on a
// fresh holdout of the given size.
Summary EstimatePopulationLoss(const DatasetMechanism& mechanism,
                               const Objective& obj,
                               const DataDistribution& dist, int n,
                               int trials, int holdout, const Vector& w_pop,
                               std::uint64_t seed);

// Reference minimizer on a large sample (at least 10^6 points by default).
Vector PopulationMinimizer(const Objective& obj, const DataDistribution& dist,
                           std::uint64_t seed, int sample_size = 1000000);

enum class ExperimentMode { kEmpirical, kPopulation, kAdversarial };

struct ObjectiveConfig {
  std::string kind = "quadratic_mean";
  int d = 2;
  int n = 100;
  double L = 1.0;
  double mu = 1.0;
  double beta = 1.0;
  double kappa = 1.0;
  double R = 1.0;
  double data_radius = 1.0;
  double ridge = 0.0;
  double tau = 0.0;
  double c = 1.0;
  double mu_v = 0.0;
  double rho = 0.0;
  // Instance default when absent.
  std::optional<DistributionKind> distribution;
  std::uint64_t data_seed = 1;
};

struct ExperimentConfig {
  ObjectiveConfig objective;
  std::vector<std::pair<double, double>> privacy_grid;
  Route route = Route::kSC;
  Implementation implementation = Implementation::kBlackbox;
  std::optional<OptimizerKind> optimizer;
  bool force = false;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::string output;
  ExperimentMode mode = ExperimentMode::kEmpirical;
  int holdout = 2000;
};

// INI sections [objective], [privacy], [mechanism], [experiment]. Throws
// InvalidArgumentError with the offending key on malformed input.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::string& path);
void ValidateConfig(const ExperimentConfig& config);

// A concrete instance built from an objective descriptor.
struct Instance {
  ObjectivePtr objective;
  std::shared_ptr<const AdversarialObjective> adversarial;
  DataDistribution distribution;
  Dataset data;
  // TERM constant when the objective is tilted.
  double c_tau = 1.0;
  // Population minimizer when known in closed form.
  std::optional<Vector> population_minimizer;
};

Instance BuildInstance(const ObjectiveConfig& config);

struct ExperimentRow {
  std::string route;
  double eps = 0.0;
  double delta = 0.0;
  int n = 0;
  int d = 0;
  double L = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  double R = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  long long T = 0;
  int trials = 0;
  double mc_mean = 0.0;
  double mc_std = 0.0;
  double ci99_upper = 0.0;
  double theory_bound = 0.0;
  double bound_ratio = 0.0;
  double wallclock_ms = 0.0;
  std::uint64_t seed = 0;
  double mc_median = 0.0;
};

inline constexpr const char* kCsvHeader =
    "route,eps,delta,n,d,L,mu,beta,R,lambda,alpha,T,trials,mc_mean,mc_std,"
    "ci99_upper,theory_bound,bound_ratio,wallclock_ms,seed";

std::string FormatCsvRow(const ExperimentRow& row);
void WriteCsv(std::ostream& out, const std::vector<ExperimentRow>& rows);
// Drops the wallclock_ms column from every line.
std::string StripWallclock(const std::string& csv);

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::map<std::string, std::string> metadata;
};

// Mechanism noise is redrawn per trial; deterministic optimizers run once.
ExperimentReport RunExperiment(const ExperimentConfig& config);

// Fills the row from a finished Monte-Carlo summary.
void FillStatistics(ExperimentRow& row, const Summary& summary);

}  // namespace dpop

#endif  // DPOP_HARNESS_H_
