#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpop/baselines.h"
#include "dpop/core.h"
#include "dpop/harness.h"
#include "dpop/mechanisms.h"
#include "dpop/noise.h"
#include "dpop/verify.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRegime = 3;
constexpr int kExitDominance = 4;

using nlohmann::json;

json ToJson(const dpop::Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

dpop::ExperimentConfig LoadOrDefault(const std::string& path) {
  if (path.empty()) {
    throw dpop::InvalidArgumentError("--config is required");
  }
  return dpop::LoadConfig(path);
}

int NoiseSample(int d, double sens, double eps, double delta, int count,
                std::uint64_t seed) {
  const dpop::NoiseSpec spec =
      dpop::CalibrateNoise(dpop::PrivacyParams(eps, delta), sens, d);
  for (int i = 0; i < count; ++i) {
    dpop::Rng rng = dpop::MakeRng(seed, static_cast<std::uint64_t>(i));
    const dpop::Vector z = dpop::SampleNoise<double>(spec, rng);
    for (int j = 0; j < d; ++j) std::cout << (j ? "," : "") << z(j);
    std::cout << '\n';
  }
  return 0;
}

int Bound(const dpop::RouteQuery& q,
          const std::optional<dpop::OptimizerKind>& optimizer) {
  json out;
  out["route"] = dpop::RouteName(q.route);
  out["theory_bound"] = dpop::TheoreticalBound(q);
  std::string why;
  out["regime_holds"] = dpop::RegimeHolds(q, &why);
  if (!why.empty()) out["regime_note"] = why;
  if (q.mode == dpop::BoundMode::kEmpirical) {
    const dpop::MechanismParams p = dpop::SelectParams(q, optimizer);
    out["lambda"] = p.lambda;
    out["alpha"] = p.alpha;
    out["T"] = p.T;
    out["optimizer"] = dpop::OptimizerName(p.optimizer);
    out["sensitivity"] = p.sensitivity.value;
    out["project"] = p.project;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int Privatize(const std::string& config_path, double eps, double delta,
              std::uint64_t seed, bool audit) {
  dpop::ExperimentConfig c = LoadOrDefault(config_path);
  const dpop::Instance inst = dpop::BuildInstance(c.objective);
  const int n = c.objective.n;
  const dpop::FunctionClassSpec spec =
      inst.adversarial ? inst.adversarial->Spec(n) : inst.objective->Spec(n);
  dpop::RouteQuery q;
  q.spec = spec;
  q.privacy = dpop::PrivacyParams(eps, delta);
  q.route = c.route;
  q.impl = dpop::Implementation::kBlackbox;
  q.c_tau = inst.c_tau;
  q.force = c.force;
  const dpop::MechanismParams params = dpop::SelectParams(q, c.optimizer);
  dpop::MechanismConfig mc = dpop::ConfigFromParams(params, spec, q.privacy);
  mc.audit = audit;
  dpop::Rng rng = dpop::MakeRng(seed);
  dpop::PrivateOutput out;
  switch (c.route) {
    case dpop::Route::kConvex:
    case dpop::Route::kSmoothConvex:
      out = dpop::RegularizedBlackbox(inst.objective, inst.data, mc, rng);
      break;
    case dpop::Route::kAdversarial:
      if (!inst.adversarial) {
        throw dpop::InvalidArgumentError(
            "route adversarial needs objective.kind adversarial");
      }
      out = dpop::AdversarialBlackbox(*inst.adversarial, inst.data, mc, rng);
      break;
    default:
      out = dpop::BlackboxOutputPerturbation(*inst.objective, inst.data, mc,
                                             rng);
      break;
  }
  json j;
  j["w_private"] = ToJson(out.w_private);
  j["epsilon"] = out.epsilon;
  j["delta"] = out.delta;
  j["sensitivity_used"] = out.sensitivity_used;
  j["noise"] = out.noise.kind == dpop::NoiseKind::kGammaNorm ? "gamma_norm"
                                                              : "gaussian";
  j["noise_scale"] = out.noise.scale;
  j["iterations"] = out.iterations;
  if (audit) {
    std::cerr << "WARNING: audit mode exposes the pre-noise point; this "
                 "output is NOT differentially private\n";
    j["pre_noise_point"] = ToJson(*out.pre_noise_point);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int Baseline(const std::string& which, const std::string& config_path,
             double eps, int grid_size, std::uint64_t seed, bool force) {
  dpop::ExperimentConfig c = LoadOrDefault(config_path);
  const dpop::Instance inst = dpop::BuildInstance(c.objective);
  dpop::Rng rng = dpop::MakeRng(seed);
  json j;
  if (which == "expmech") {
    const dpop::FunctionClassSpec spec =
        inst.objective->Spec(c.objective.n);
    const dpop::GridSpec grid =
        dpop::GridSpec::Ball(spec.d, grid_size, spec.R);
    const dpop::ExpMechResult r =
        dpop::ExponentialMechanism(*inst.objective, inst.data, grid, eps, rng);
    j["w"] = ToJson(r.w);
    j["epsilon"] = r.epsilon;
    j["grid_points"] = r.points.rows();
    j["discretization_error"] = r.discretization_error;
  } else if (which == "exploc") {
    const dpop::ExpLocResult r = dpop::ExpPlusLocalization(
        *inst.objective, inst.data, eps, grid_size, rng, force);
    j["w"] = ToJson(r.sample.w);
    j["w0"] = ToJson(r.localization.w0);
    j["localized_radius"] = r.localization.radius;
    j["xi"] = r.localization.xi;
    j["epsilon_localization"] = r.epsilon_localization;
    j["epsilon_sampling"] = r.epsilon_sampling;
    j["epsilon_total"] = r.epsilon_total;
    j["discretization_error"] = r.sample.discretization_error;
  } else {
    throw dpop::InvalidArgumentError("baseline must be expmech or exploc");
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int Run(const std::string& config_path, const std::string& output) {
  dpop::ExperimentConfig c = LoadOrDefault(config_path);
  if (!output.empty()) c.output = output;
  const dpop::ExperimentReport report = dpop::RunExperiment(c);
  if (c.output.empty() || c.output == "-") {
    dpop::WriteCsv(std::cout, report.rows);
  } else {
    std::ofstream out(c.output);
    if (!out) throw dpop::InvalidArgumentError("cannot write " + c.output);
    dpop::WriteCsv(out, report.rows);
  }
  for (const auto& [k, v] : report.metadata) {
    std::cerr << "# " << k << " = " << v << '\n';
  }
  return 0;
}

int Verify(std::uint64_t seed, const std::vector<int>& only,
           const std::string& csv_path) {
  const dpop::VerifyReport report =
      dpop::RunVerify(seed, std::set<int>(only.begin(), only.end()));
  for (const auto& r : report.criteria) {
    std::cout << dpop::FormatCriterion(r) << '\n';
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw dpop::InvalidArgumentError("cannot write " + csv_path);
    out << report.Csv();
  }
  return report.all_passed() ? 0 : kExitDominance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private output perturbation toolkit"};
  app.require_subcommand(1);

  auto* noise = app.add_subcommand("noise", "Noise utilities");
  auto* sample = noise->add_subcommand("sample", "Draw calibrated noise");
  noise->require_subcommand(1);
  int d = 2, count = 1;
  double sens = 1.0, eps = 1.0, delta = 0.0;
  std::uint64_t seed = 1;
  sample->add_option("--d", d)->check(CLI::PositiveNumber);
  sample->add_option("--sensitivity", sens)->check(CLI::PositiveNumber);
  sample->add_option("--eps", eps)->check(CLI::PositiveNumber);
  sample->add_option("--delta", delta);
  sample->add_option("--count", count)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);

  auto* bound = app.add_subcommand("bound", "Theoretical bound and parameters");
  dpop::RouteQuery q;
  std::string route = "sc", mode = "empirical", impl = "conceptual",
              optimizer;
  bound->add_option("--route", route);
  bound->add_option("--L", q.spec.L);
  bound->add_option("--mu", q.spec.mu);
  bound->add_option("--beta", q.spec.beta);
  bound->add_option("--R", q.spec.R);
  bound->add_option("--n", q.spec.n);
  bound->add_option("--d", q.spec.d);
  bound->add_flag("--erm", q.spec.erm);
  bound->add_option("--eps", eps);
  bound->add_option("--delta", delta);
  bound->add_option("--mode", mode)
      ->check(CLI::IsMember({"empirical", "population"}));
  bound->add_option("--impl", impl)
      ->check(CLI::IsMember({"conceptual", "blackbox"}));
  bound->add_option("--c-tau", q.c_tau);
  bound->add_option("--optimizer", optimizer);
  bound->add_flag("--force", q.force);

  auto* privatize = app.add_subcommand("privatize", "Run one mechanism");
  std::string config;
  bool audit = false;
  privatize->add_option("--config", config)->required();
  privatize->add_option("--eps", eps);
  privatize->add_option("--delta", delta);
  privatize->add_option("--seed", seed);
  privatize->add_flag("--audit", audit,
                      "Also print the pre-noise point (not private)");

  auto* baseline = app.add_subcommand("baseline", "Grid baselines (d <= 2)");
  std::string which;
  int grid = 129;
  bool force = false;
  baseline->add_option("kind", which)
      ->required()
      ->check(CLI::IsMember({"expmech", "exploc"}));
  baseline->add_option("--objective,--config", config)->required();
  baseline->add_option("--eps", eps);
  baseline->add_option("--grid", grid);
  baseline->add_option("--seed", seed);
  baseline->add_flag("--force", force);

  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string output;
  run->add_option("--config", config)->required();
  run->add_option("--output", output);

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  std::vector<int> only;
  std::string csv;
  seed = dpop::kDefaultVerifySeed;
  verify->add_option("--seed", seed);
  verify->add_option("--only", only)->delimiter(',');
  verify->add_option("--csv", csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config-error exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) return NoiseSample(d, sens, eps, delta, count, seed);
    if (bound->parsed()) {
      q.privacy = dpop::PrivacyParams(eps, delta);
      q.route = dpop::ParseRoute(route);
      q.mode = mode == "population" ? dpop::BoundMode::kPopulation
                                    : dpop::BoundMode::kEmpirical;
      q.impl = impl == "blackbox" ? dpop::Implementation::kBlackbox
                                  : dpop::Implementation::kConceptual;
      std::optional<dpop::OptimizerKind> opt;
      if (!optimizer.empty()) opt = dpop::ParseOptimizer(optimizer);
      return Bound(q, opt);
    }
    if (privatize->parsed()) return Privatize(config, eps, delta, seed, audit);
    if (baseline->parsed()) {
      return Baseline(which, config, eps, grid, seed, force);
    }
    if (run->parsed()) return Run(config, output);
    if (verify->parsed()) return Verify(seed, only, csv);
  } catch (const dpop::RegimeError& e) {
    std::cerr << "regime refusal: " << e.what() << '\n';
    return kExitRegime;
  } catch (const dpop::InvalidArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dpop::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
