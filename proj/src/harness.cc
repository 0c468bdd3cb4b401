#include "dpop/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dpop/noise.h"
#include "dpop/optimizers.h"
#include "dpop/sensitivity.h"

namespace dpop {
namespace {

// Stream reserved for the one-off optimizer run of deterministic methods.
constexpr std::uint64_t kPrepareStream = 1ULL << 40;

Vector UniformInBall(int d, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = radius * std::pow(unif(rng), 1.0 / d);
  return SampleUnitSphere<double>(d, rng) * r;
}

std::vector<double> ParseList(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw InvalidArgumentError("config key " + key + ": bad number '" +
                                 item + "'");
    }
  }
  if (out.empty()) throw InvalidArgumentError("config key " + key + ": empty");
  return out;
}

template <typename T>
T Get(const boost::property_tree::ptree& pt, const std::string& key,
      T fallback) {
  try {
    return pt.get<T>(key, fallback);
  } catch (const boost::property_tree::ptree_error&) {
    throw InvalidArgumentError("config key " + key + ": bad value");
  }
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

Summary MonteCarloSummary(int trials, std::uint64_t seed,
                   const std::function<double(Rng&)>& sample) {
  if (trials < 1) throw InvalidArgumentError("trials must be positive");
  std::vector<double> values(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
    values[t] = sample(rng);
  }
  return Summarize(values);
}

std::string DistributionName(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::kUniformBall:
      return "uniform_ball";
    case DistributionKind::kUniformSphere:
      return "uniform_sphere";
    case DistributionKind::kPreimageBall:
      return "preimage_ball";
    case DistributionKind::kClustered:
      return "clustered";
    case DistributionKind::kGaussianProjected:
      return "gaussian_projected";
    case DistributionKind::kFixedList:
      return "fixed_list";
  }
  return "unknown";
}

DistributionKind ParseDistribution(const std::string& name) {
  for (DistributionKind k :
       {DistributionKind::kUniformBall, DistributionKind::kUniformSphere,
        DistributionKind::kPreimageBall, DistributionKind::kClustered,
        DistributionKind::kGaussianProjected, DistributionKind::kFixedList}) {
    if (DistributionName(k) == name) return k;
  }
  throw InvalidArgumentError("unknown distribution: " + name);
}

Dataset DataDistribution::Sample(int n, Rng& rng) const {
  if (n < 1) throw InvalidArgumentError("sample size must be positive");
  Dataset x;
  x.points.resize(n, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    Vector p;
    switch (kind) {
      case DistributionKind::kUniformBall:
        p = UniformInBall(d, radius, rng);
        break;
      case DistributionKind::kUniformSphere:
        p = SampleUnitSphere<double>(d, rng) * radius;
        break;
      case DistributionKind::kPreimageBall:
        p = transform * UniformInBall(d, radius, rng);
        break;
      case DistributionKind::kClustered:
        p = center + UniformInBall(d, radius, rng);
        break;
      case DistributionKind::kGaussianProjected:
        p.resize(d);
        for (int j = 0; j < d; ++j) p(j) = sigma * normal(rng);
        p = ProjectBall(p, radius);
        break;
      case DistributionKind::kFixedList:
        if (fixed.rows() == 0) {
          throw InvalidArgumentError("fixed_list distribution has no rows");
        }
        p = fixed.row(i % fixed.rows()).transpose();
        break;
    }
    x.points.row(i) = p.transpose();
  }
  if (label_w) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    x.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      const double s = x.record(i).dot(*label_w);
      x.labels(i) = unif(rng) < 1.0 / (1.0 + std::exp(-s)) ? 1.0 : -1.0;
    }
  }
  return x;
}

Summary EstimateExcessRisk(const TrialMechanism& mechanism,
                           const Objective& obj, const Dataset& x, int trials,
                           std::uint64_t seed, double f_star) {
  return MonteCarloSummary(trials, seed, [&](Rng& rng) {
    return obj.Value(mechanism(rng), x) - f_star;
  });
}

Summary EstimateExcessRisk(const TrialMechanism& mechanism,
                           const Objective& obj, const Dataset& x, int trials,
                           std::uint64_t seed) {
  const double f_star = obj.Value(ReferenceMinimizer(obj, x), x);
  return EstimateExcessRisk(mechanism, obj, x, trials, seed, f_star);
}

Summary EstimatePopulationLoss(const DatasetMechanism& mechanism,
                               const Objective& obj,
                               const DataDistribution& dist, int n,
                               int trials, int holdout, const Vector& w_pop,
                               std::uint64_t seed) {
  if (holdout < 1) throw InvalidArgumentError("holdout must be positive");
  if (dist.d != obj.dim() && !dist.label_w) {
    throw InvalidArgumentError("distribution/objective dimension mismatch");
  }
  return MonteCarloSummary(trials, seed, [&](Rng& rng) {
    const Dataset x = dist.Sample(n, rng);
    const Vector w = mechanism(x, rng);
    const Dataset h = dist.Sample(holdout, rng);
    double diff = 0.0;
    for (int i = 0; i < holdout; ++i) {
      diff += obj.SampleValue(w, h, i) - obj.SampleValue(w_pop, h, i);
    }
    return diff / holdout;
  });
}

Vector PopulationMinimizer(const Objective& obj, const DataDistribution& dist,
                           std::uint64_t seed, int sample_size) {
  Rng rng = MakeRng(seed, kPrepareStream + 1);
  const Dataset big = dist.Sample(sample_size, rng);
  return ReferenceMinimizer(obj, big);
}

ExperimentConfig ParseConfig(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgumentError(std::string("config parse error: ") +
                               e.what());
  }
  ExperimentConfig c;
  ObjectiveConfig& o = c.objective;
  o.kind = Get<std::string>(tree, "objective.kind", o.kind);
  o.d = Get<int>(tree, "objective.d", o.d);
  o.n = Get<int>(tree, "objective.n", o.n);
  o.L = Get<double>(tree, "objective.L", o.L);
  o.mu = Get<double>(tree, "objective.mu", o.mu);
  o.beta = Get<double>(tree, "objective.beta", o.beta);
  o.kappa = Get<double>(tree, "objective.kappa", o.kappa);
  o.R = Get<double>(tree, "objective.R", o.R);
  o.data_radius = Get<double>(tree, "objective.data_radius", o.data_radius);
  o.ridge = Get<double>(tree, "objective.ridge", o.ridge);
  o.tau = Get<double>(tree, "objective.tau", o.tau);
  o.c = Get<double>(tree, "objective.c", o.c);
  o.mu_v = Get<double>(tree, "objective.mu_v", o.mu_v);
  o.rho = Get<double>(tree, "objective.rho", o.rho);
  o.data_seed = Get<std::uint64_t>(tree, "objective.data_seed", o.data_seed);
  if (auto dist = tree.get_optional<std::string>("objective.distribution")) {
    o.distribution = ParseDistribution(*dist);
  }

  const auto eps = ParseList(
      "privacy.eps", Get<std::string>(tree, "privacy.eps", "1"));
  const auto delta = ParseList(
      "privacy.delta", Get<std::string>(tree, "privacy.delta", "0"));
  if (delta.size() != 1 && delta.size() != eps.size()) {
    throw InvalidArgumentError(
        "config key privacy.delta: length must be 1 or match privacy.eps");
  }
  for (size_t i = 0; i < eps.size(); ++i) {
    c.privacy_grid.emplace_back(eps[i], delta.size() == 1 ? delta[0]
                                                          : delta[i]);
  }

  c.route = ParseRoute(Get<std::string>(tree, "mechanism.route", "sc"));
  const std::string impl =
      Get<std::string>(tree, "mechanism.implementation", "blackbox");
  if (impl == "blackbox") {
    c.implementation = Implementation::kBlackbox;
  } else if (impl == "conceptual") {
    c.implementation = Implementation::kConceptual;
  } else {
    throw InvalidArgumentError("config key mechanism.implementation: " + impl);
  }
  if (auto opt = tree.get_optional<std::string>("mechanism.optimizer")) {
    c.optimizer = ParseOptimizer(*opt);
  }
  c.force = Get<bool>(tree, "mechanism.force", false);

  c.trials = Get<int>(tree, "experiment.trials", c.trials);
  c.seed = Get<std::uint64_t>(tree, "experiment.seed", c.seed);
  c.output = Get<std::string>(tree, "experiment.output", "");
  c.holdout = Get<int>(tree, "experiment.holdout", c.holdout);
  const std::string mode =
      Get<std::string>(tree, "experiment.mode", "empirical");
  if (mode == "empirical") {
    c.mode = ExperimentMode::kEmpirical;
  } else if (mode == "population") {
    c.mode = ExperimentMode::kPopulation;
  } else if (mode == "adversarial") {
    c.mode = ExperimentMode::kAdversarial;
  } else {
    throw InvalidArgumentError("config key experiment.mode: " + mode);
  }
  ValidateConfig(c);
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open config: " + path);
  return ParseConfig(in);
}

void ValidateConfig(const ExperimentConfig& c) {
  if (c.trials < 100) {
    throw InvalidArgumentError(
        "config key experiment.trials: need >= 100 for a dominance claim");
  }
  if (c.privacy_grid.empty()) {
    throw InvalidArgumentError("config key privacy.eps: empty grid");
  }
  for (const auto& [eps, delta] : c.privacy_grid) {
    try {
      PrivacyParams p(eps, delta);
    } catch (const std::exception& e) {
      throw InvalidArgumentError(std::string("config key privacy: ") +
                                 e.what());
    }
  }
  if (c.objective.d < 1 || c.objective.n < 1) {
    throw InvalidArgumentError("config key objective.d/n: must be positive");
  }
  if (c.mode == ExperimentMode::kAdversarial &&
      c.route != Route::kAdversarial) {
    throw InvalidArgumentError(
        "config key experiment.mode: adversarial mode needs route "
        "adversarial");
  }
  if (c.mode == ExperimentMode::kPopulation && c.holdout < 1) {
    throw InvalidArgumentError("config key experiment.holdout: must be >= 1");
  }
}

Instance BuildInstance(const ObjectiveConfig& o) {
  Instance inst;
  Rng rng = MakeRng(o.data_seed, 0);
  DataDistribution& dist = inst.distribution;
  dist.d = o.d;
  dist.radius = o.data_radius;
  bool symmetric_population = false;

  if (o.kind == "quadratic_mean") {
    auto q = std::make_shared<QuadraticMean>(
        QuadraticMean::WithCondition(o.d, o.beta, o.kappa, o.R, rng));
    dist.kind = DistributionKind::kPreimageBall;
    dist.transform = q->m();
    dist.radius = o.R;
    inst.objective = q;
    symmetric_population = true;
  } else if (o.kind == "appendix_f") {
    inst.objective = std::make_shared<AppendixF>(o.d, o.mu, o.L, 0.0);
    dist.kind = DistributionKind::kUniformSphere;
    dist.radius = 1.0;
    symmetric_population = true;
  } else if (o.kind == "abs_deviation") {
    inst.objective = std::make_shared<AbsDeviation>(o.d, o.R);
    dist.radius = std::min(o.data_radius, o.R);
  } else if (o.kind == "logistic") {
    inst.objective = std::make_shared<Logistic>(o.d, o.R, o.data_radius);
    dist.label_w = SampleUnitSphere<double>(o.d, rng) * 2.0;
  } else if (o.kind == "linear_quadratic") {
    inst.objective =
        std::make_shared<LinearQuadratic>(o.d, o.mu, o.R, o.data_radius);
    symmetric_population = true;
  } else if (o.kind == "tilted_quadratic") {
    auto inner = std::make_shared<QuadraticMean>(Matrix::Identity(o.d, o.d),
                                                 o.mu, o.R);
    const double A_R = 2.0 * o.mu * o.R * o.R;
    const double tau = o.tau > 0.0 ? o.tau : 1.0 / A_R;
    auto tilted = std::make_shared<Tilted>(inner, tau, 0.0, A_R);
    inst.c_tau = tilted->c_tau();
    inst.objective = tilted;
    dist.radius = o.R;
  } else if (o.kind == "adversarial") {
    inst.adversarial = std::make_shared<AdversarialObjective>(
        o.d, o.mu, o.c, o.mu_v, o.rho, o.R, o.data_radius);
    inst.objective = inst.adversarial->Unperturbed();
    dist.kind = DistributionKind::kClustered;
    dist.center = Vector::Unit(o.d, 0) * (0.75 * o.data_radius);
    dist.radius = 0.25 * o.data_radius;
  } else {
    throw InvalidArgumentError("config key objective.kind: unknown '" +
                               o.kind + "'");
  }
  if (o.distribution && *o.distribution != dist.kind) {
    dist.kind = *o.distribution;
    symmetric_population =
        symmetric_population &&
        (dist.kind == DistributionKind::kUniformBall ||
         dist.kind == DistributionKind::kUniformSphere ||
         dist.kind == DistributionKind::kGaussianProjected);
  }
  if (o.ridge > 0.0) {
    inst.objective = std::make_shared<Regularized>(inst.objective, o.ridge);
  }
  if (symmetric_population && o.ridge == 0.0) {
    inst.population_minimizer = Vector::Zero(o.d);
  }
  inst.data = dist.Sample(o.n, rng);
  return inst;
}

std::string FormatCsvRow(const ExperimentRow& r) {
  std::ostringstream s;
  s << r.route << ',' << Fmt(r.eps) << ',' << Fmt(r.delta) << ',' << r.n
    << ',' << r.d << ',' << Fmt(r.L) << ',' << Fmt(r.mu) << ','
    << Fmt(r.beta) << ',' << Fmt(r.R) << ',' << Fmt(r.lambda) << ','
    << Fmt(r.alpha) << ',' << r.T << ',' << r.trials << ','
    << Fmt(r.mc_mean) << ',' << Fmt(r.mc_std) << ',' << Fmt(r.ci99_upper)
    << ',' << Fmt(r.theory_bound) << ',' << Fmt(r.bound_ratio) << ','
    << Fmt(r.wallclock_ms) << ',' << r.seed;
  return s.str();
}

void WriteCsv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << FormatCsvRow(r) << '\n';
}

std::string StripWallclock(const std::string& csv) {
  // wallclock_ms is the 19th of 20 columns.
  constexpr int kColumn = 18;
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string col;
    while (std::getline(ls, col, ',')) cols.push_back(col);
    bool first = true;
    for (size_t i = 0; i < cols.size(); ++i) {
      if (static_cast<int>(i) == kColumn) continue;
      if (!first) out << ',';
      out << cols[i];
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

void FillStatistics(ExperimentRow& row, const Summary& s) {
  row.trials = s.count;
  row.mc_mean = s.mean;
  row.mc_std = s.std;
  row.mc_median = s.median;
  row.ci99_upper = s.ci99_upper;
  row.bound_ratio =
      row.theory_bound > 0.0 ? row.ci99_upper / row.theory_bound : 0.0;
}

namespace {

// Deterministic pre-noise stage for one dataset.
PreparedRelease PrepareFor(const ExperimentConfig& c, const Instance& inst,
                           const Dataset& x, const RouteQuery& q,
                           const MechanismParams& params, Rng& rng) {
  const FunctionClassSpec& spec = q.spec;
  if (c.implementation == Implementation::kConceptual) {
    switch (c.route) {
      case Route::kConvex:
      case Route::kSmoothConvex:
        return PrepareConceptualRegularized(inst.objective, x, q.privacy,
                                            params.lambda, params.project);
      case Route::kTerm:
        return PrepareConceptual(*inst.objective, x, q.privacy, true,
                                 params.sensitivity);
      case Route::kAdversarial: {
        PreparedRelease p =
            PrepareConceptual(*inst.objective, x, q.privacy, true);
        p.center = ProjectBall(inst.adversarial->MinimizeG(x), spec.R);
        p.noise = CalibrateNoise(q.privacy, ClassSensitivity(spec).value,
                                 spec.d);
        return p;
      }
      default:
        return PrepareConceptual(*inst.objective, x, q.privacy,
                                 params.project);
    }
  }
  const MechanismConfig mc = ConfigFromParams(params, spec, q.privacy);
  switch (c.route) {
    case Route::kConvex:
    case Route::kSmoothConvex:
      return PrepareRegularizedBlackbox(inst.objective, x, mc, rng);
    case Route::kAdversarial:
      return PrepareAdversarialBlackbox(*inst.adversarial, x, mc, rng);
    default:
      return PrepareBlackbox(*inst.objective, x, mc, rng);
  }
}

}  // namespace

ExperimentReport RunExperiment(const ExperimentConfig& c) {
  ValidateConfig(c);
  const Instance inst = BuildInstance(c.objective);
  if (c.route == Route::kAdversarial && !inst.adversarial) {
    throw InvalidArgumentError(
        "config key mechanism.route: adversarial needs objective.kind "
        "adversarial");
  }
  const int n = c.objective.n;
  const FunctionClassSpec spec = inst.adversarial
                                     ? inst.adversarial->Spec(n)
                                     : inst.objective->Spec(n);
  ExperimentReport report;
  report.metadata["seed"] = std::to_string(c.seed);
  report.metadata["objective"] = c.objective.kind;
  report.metadata["route"] = RouteName(c.route);
#ifdef DPOP_GIT_HASH
  report.metadata["git"] = DPOP_GIT_HASH;
#endif

  for (const auto& [eps, delta] : c.privacy_grid) {
    const auto start = std::chrono::steady_clock::now();
    RouteQuery q;
    q.spec = spec;
    q.privacy = PrivacyParams(eps, delta);
    q.route = c.route;
    q.mode = c.mode == ExperimentMode::kPopulation ? BoundMode::kPopulation
                                                   : BoundMode::kEmpirical;
    q.impl = c.implementation;
    q.c_tau = inst.c_tau;
    q.force = c.force;

    ExperimentRow row;
    row.route = RouteName(c.route);
    row.eps = eps;
    row.delta = delta;
    row.n = n;
    row.d = spec.d;
    row.L = spec.L;
    row.mu = spec.mu;
    row.beta = spec.beta;
    row.R = spec.R;
    row.seed = c.seed;
    row.theory_bound = TheoreticalBound(q);

    const MechanismParams params = SelectParams(q, c.optimizer);
    row.lambda = params.lambda;
    if (c.implementation == Implementation::kBlackbox) {
      row.alpha = params.alpha;
      row.T = params.T;
    }
    const bool deterministic = c.implementation ==
                                   Implementation::kConceptual ||
                               IsDeterministic(params.optimizer);

    Summary summary;
    if (c.mode == ExperimentMode::kPopulation) {
      const Vector w_pop =
          inst.population_minimizer
              ? *inst.population_minimizer
              : PopulationMinimizer(*inst.objective, inst.distribution,
                                    c.seed);
      DatasetMechanism mech = [&](const Dataset& x, Rng& rng) {
        return Release(PrepareFor(c, inst, x, q, params, rng), rng).w_private;
      };
      summary = EstimatePopulationLoss(mech, *inst.objective,
                                       inst.distribution, n, c.trials,
                                       c.holdout, w_pop, c.seed);
    } else {
      std::optional<PreparedRelease> fixed;
      if (deterministic) {
        Rng prep = MakeRng(c.seed, kPrepareStream);
        fixed = PrepareFor(c, inst, inst.data, q, params, prep);
      }
      TrialMechanism mech = [&](Rng& rng) {
        if (fixed) return Release(*fixed, rng).w_private;
        return Release(PrepareFor(c, inst, inst.data, q, params, rng), rng)
            .w_private;
      };
      if (inst.adversarial) {
        const auto& adv = *inst.adversarial;
        const double g_star = adv.G(adv.MinimizeG(inst.data), inst.data);
        summary = MonteCarloSummary(c.trials, c.seed, [&](Rng& rng) {
          return adv.G(mech(rng), inst.data) - g_star;
        });
      } else {
        summary = EstimateExcessRisk(mech, *inst.objective, inst.data,
                                     c.trials, c.seed);
      }
    }
    FillStatistics(row, summary);
    row.wallclock_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dpop
