// mimstd: simulate data, standardize a treatment effect, run the benchmark,
// compute true estimands, and check synthesis-count stability.
//
// Exit codes: 0 success, 2 usage or schema error, 3 numerical or method
// error, 4 IO error, 5 negative pooled variance.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mimstd/config.hpp"
#include "mimstd/errors.hpp"
#include "mimstd/gcomp.hpp"
#include "mimstd/harness.hpp"
#include "mimstd/io.hpp"
#include "mimstd/kernels.hpp"
#include "mimstd/mim.hpp"
#include "mimstd/random.hpp"
#include "mimstd/simgen.hpp"
#include "mimstd/stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mimstd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr int kExitNegativeVariance = 5;

const char* kVersion = MIMSTD_VERSION;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_file_atomic(out_path, text);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

std::size_t default_workers() {
  if (const char* env = std::getenv("MIMSTD_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw SchemaError(std::string("MIMSTD_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json diagnostics_json(const diagnostics::ParameterDiagnostics& d, double acceptance) {
  return json{{"max_rhat", d.max_rhat()},
              {"min_ess", d.min_ess()},
              {"rhat", d.rhat},
              {"ess", d.ess},
              {"acceptance_rate", acceptance}};
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t n_index = 500;
  double kappa = 1.0;
};

int cmd_simulate(const SimulateArgs& a) {
  const config::RunConfig cfg = a.config.empty() ? config::defaults(config::Profile::full) : config::load_config(a.config);
  simgen::DgmConfig dgm = cfg.base.dgm;
  dgm.n_index = a.n_index;
  const IndexStudyData index = simgen::simulate_index_trial(dgm, a.seed);
  const TargetCovariates target = simgen::simulate_target(dgm, a.kappa, a.seed);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const std::string index_text = io::index_csv(index);
  const std::string target_text = io::target_csv(target);
  json manifest{{"tool", "mimstd"},
                {"version", kVersion},
                {"command", "simulate"},
                {"config_hash", io::hex64(io::fnv1a64(cfg.canonical()))},
                {"seed", a.seed},
                {"n_index", a.n_index},
                {"n_target", dgm.n_target},
                {"kappa", a.kappa},
                {"files",
                 {{"index.csv", io::hex64(io::fnv1a64(index_text))}, {"target.csv", io::hex64(io::fnv1a64(target_text))}}}};
  io::write_file_atomic(dir / "index.csv", index_text);
  io::write_file_atomic(dir / "target.csv", target_text);
  io::write_file_atomic(dir / "manifest.json", dump(manifest));
  return 0;
}

// ---- standardize ------------------------------------------------------------

struct StandardizeArgs {
  std::string index;
  std::string target;
  bool within_study = false;
  std::string method = "mim";
  std::string pooling = "rules";
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 20240101;
  std::size_t chains = 2;
  std::size_t iterations = 4000;
  std::size_t burn_in = 2000;
  std::size_t thin = 4;
  std::size_t simulation_draws = 100000;
  bool allow_negative_variance = false;
  bool skip_diagnostics = false;
  std::string scale = "log_odds_ratio";
  std::string out;
};

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  return fs::equivalent(a, b, ec);
}

int cmd_standardize(const StandardizeArgs& a) {
  const std::string index_text = io::read_file(a.index);
  const IndexStudyData index = io::parse_index_csv(index_text, a.index);
  index.validate();
  const bool within = a.within_study || a.target.empty() || same_file(a.index, a.target);
  TargetCovariates target;
  std::string target_hash;
  if (within) {
    target = within_study_target(index);
    target_hash = io::hex64(io::fnv1a64(index_text));
  } else {
    const std::string target_text = io::read_file(a.target);
    target = io::parse_target_csv(target_text, a.target);
    target_hash = io::hex64(io::fnv1a64(target_text));
  }
  if (target.covariates.cols() != index.covariates.cols()) {
    throw SchemaError("index has " + std::to_string(index.covariates.cols()) + " covariates but target has " +
                      std::to_string(target.covariates.cols()));
  }

  json out{{"method", a.method},
           {"mode", within ? "within_study" : "external_target"},
           {"n_index", index.size()},
           {"n_target", static_cast<std::size_t>(target.covariates.rows())},
           {"inputs", {{"index_fnv1a64", io::hex64(io::fnv1a64(index_text))}, {"target_fnv1a64", target_hash}}},
           {"version", kVersion}};

  if (a.method == "mim") {
    bayes::McmcConfig mcmc;
    mcmc.n_chains = a.chains;
    mcmc.iterations = a.iterations;
    mcmc.burn_in = a.burn_in;
    mcmc.thin = a.thin;
    mcmc.seed = a.seed;
    mcmc.enforce_diagnostics = !a.skip_diagnostics;
    mim::MimOptions options;
    options.pooling =
        a.pooling == "rules" ? mim::PoolingMethod::combining_rules : mim::PoolingMethod::posterior_simulation;
    options.level = a.level;
    options.simulation_draws = a.simulation_draws;
    options.clamp_negative_variance = a.allow_negative_variance;
    const mim::MimResult r = mim::mim_standardize(index, target, bayes::PriorSpec{}, mcmc, options);
    const auto& p = r.pooled;
    out["scale"] = "log_odds_ratio";
    out["estimate"] = p.estimate;
    out["variance"] = p.variance;
    out["std_error"] = std::sqrt(p.variance);
    out["lower"] = p.lower;
    out["upper"] = p.upper;
    out["level"] = p.level;
    out["pooling"] = std::string(mim::pooling_name(p.method));
    out["dof"] = p.dof;
    out["m_generated"] = r.m_generated;
    out["m_used"] = p.m_used;
    out["n_degenerate"] = r.n_degenerate;
    out["delta_bar"] = p.delta_bar;
    out["v_bar"] = p.v_bar;
    out["b"] = p.b;
    out["variance_clamped"] = p.variance_clamped;
    if (p.method == mim::PoolingMethod::posterior_simulation) {
      out["simulation_draws"] = a.simulation_draws;
      out["nonpositive_draws"] = p.nonpositive_draws;
    }
    out["mcmc"] = {{"chains", a.chains}, {"iterations", a.iterations}, {"burn_in", a.burn_in}, {"thin", a.thin}};
    out["diagnostics"] = diagnostics_json(r.diagnostics, r.acceptance_rate);
    if (p.variance_clamped) std::cerr << "warning: negative pooled variance clamped to " << mim::kVarianceFloor << "\n";
  } else {
    gcomp::EffectScale scale = gcomp::EffectScale::log_odds_ratio;
    if (a.scale == "mean_difference") scale = gcomp::EffectScale::mean_difference;
    if (a.scale == "log_risk_ratio") scale = gcomp::EffectScale::log_risk_ratio;
    gcomp::BootstrapConfig boot;
    boot.n_resamples = a.resamples;
    boot.seed = a.seed;
    const gcomp::GcompResult r = gcomp::gcomp_bootstrap(index, target, scale, boot, a.level);
    out["scale"] = std::string(gcomp::scale_name(scale));
    out["estimate"] = r.estimate;
    out["variance"] = r.std_error * r.std_error;
    out["std_error"] = r.std_error;
    out["lower"] = r.lower;
    out["upper"] = r.upper;
    out["level"] = r.level;
    out["interval"] = "percentile";
    out["n_resamples"] = a.resamples;
    out["n_resamples_used"] = r.n_resamples_used;
    out["n_failed_resamples"] = r.n_failed_resamples;
    out["plug_in"] = r.plug_in;
  }
  out["seed"] = a.seed;
  emit(dump(out), a.out);
  return 0;
}

// ---- truth ------------------------------------------------------------------

struct TruthArgs {
  std::string config;
  double kappa = 1.0;
  std::size_t cohort = simgen::kDefaultCohort;
  std::uint64_t seed = 1;
  bool bernoulli = false;
  std::string out;
};

json truth_json(const simgen::DgmConfig& dgm, double kappa, std::size_t cohort, std::uint64_t seed, bool bernoulli,
                const simgen::TrueEffect& t) {
  return json{{"kappa", kappa},
              {"cohort_size", cohort},
              {"seed", seed},
              {"averaging", bernoulli ? "bernoulli" : "expectation"},
              {"p1", t.p1},
              {"p0", t.p0},
              {"log_or", t.log_or},
              {"conditional_at_means", simgen::true_conditional_at_means(dgm, kappa)}};
}

int cmd_truth(const TruthArgs& a) {
  const config::RunConfig cfg = a.config.empty() ? config::defaults(config::Profile::full) : config::load_config(a.config);
  const auto t = simgen::true_marginal_logor(cfg.base.dgm, a.kappa, a.cohort, a.seed, a.bernoulli);
  emit(dump(truth_json(cfg.base.dgm, a.kappa, a.cohort, a.seed, a.bernoulli, t)), a.out);
  return 0;
}

// ---- benchmark --------------------------------------------------------------

struct BenchmarkArgs {
  std::string config;
  std::string profile;
  std::string out_dir = "benchmark-out";
  bool resume = false;
  std::size_t workers = 0;
  std::vector<std::string> scenarios;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> base_seed;
  bool quiet = false;
};

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return text;
}

constexpr const char* kRecordHeader = "scenario,replicate,method,estimate,variance,lower,upper,covered,failure\n";

std::string records_csv_body(const std::vector<harness::ReplicateRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.scenario + "," + std::to_string(r.replicate) + "," + std::string(harness::method_name(r.method)) + ",";
    if (r.ok()) {
      out += io::format_double(r.estimate) + "," + io::format_double(r.variance) + "," + io::format_double(r.lower) +
             "," + io::format_double(r.upper) + "," + (r.covered ? "1" : "0") + ",\n";
    } else {
      out += ",,,,," + sanitize(r.failure) + "\n";
    }
  }
  return out;
}

std::vector<harness::ReplicateRecord> parse_records(const std::string& text, const std::string& source) {
  std::vector<harness::ReplicateRecord> out;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (int i = 0; i < 8; ++i) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) throw SchemaError(source + ":" + std::to_string(line_no) + ": too few fields");
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    f.push_back(line.substr(start));
    harness::ReplicateRecord r;
    r.scenario = f[0];
    r.replicate = std::stoul(f[1]);
    r.method = harness::parse_method(f[2]);
    r.failure = f[8];
    if (r.ok()) {
      r.estimate = std::stod(f[3]);
      r.variance = std::stod(f[4]);
      r.lower = std::stod(f[5]);
      r.upper = std::stod(f[6]);
      r.covered = f[7] == "1";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string truth_key(const config::RunConfig& cfg, double kappa) {
  std::ostringstream os;
  const auto& b = cfg.base;
  os << io::hex64(io::fnv1a64(cfg.canonical().substr(cfg.canonical().find("dgm=")))) << "_k" << io::format_double(kappa)
     << "_n" << b.truth_cohort << "_s" << b.truth_seed;
  return os.str();
}

int cmd_benchmark(const BenchmarkArgs& a) {
  config::RunConfig cfg = a.config.empty() ? config::defaults(config::parse_profile(a.profile.empty() ? "full" : a.profile))
                                           : config::load_config(a.config, a.profile);
  if (a.replicates) cfg.base.n_replicates = *a.replicates;
  if (a.base_seed) cfg.base.base_seed = *a.base_seed;
  cfg.base.workers = a.workers ? a.workers : default_workers();

  std::vector<harness::ScenarioSpec> specs = cfg.scenarios();
  if (!a.scenarios.empty()) {
    std::vector<harness::ScenarioSpec> kept;
    for (const auto& s : specs) {
      if (std::find(a.scenarios.begin(), a.scenarios.end(), s.id()) != a.scenarios.end()) kept.push_back(s);
    }
    if (kept.size() != a.scenarios.size()) throw SchemaError("unknown scenario id in --scenario");
    specs = kept;
  }
  for (const auto& s : specs) s.validate();

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  ensure_dir(dir / "scenarios");
  const std::string canonical = cfg.canonical();
  const std::string config_hash = io::hex64(io::fnv1a64(canonical));

  json manifest{{"tool", "mimstd"},
                {"version", kVersion},
                {"command", "benchmark"},
                {"profile", config::profile_name(cfg.profile)},
                {"config_hash", config_hash},
                {"base_seed", cfg.base.base_seed},
                {"truth_seed", cfg.base.truth_seed},
                {"truth_cohort", cfg.base.truth_cohort},
                {"replicates", cfg.base.n_replicates},
                {"scenarios", json::array()}};
  for (const auto& s : specs) manifest["scenarios"].push_back(s.id());

  const fs::path manifest_path = dir / "manifest.json";
  if (a.resume && fs::exists(manifest_path)) {
    const json previous = json::parse(io::read_file(manifest_path), nullptr, false);
    if (previous.is_discarded() || previous.value("config_hash", "") != config_hash) {
      throw SchemaError("cannot resume: '" + manifest_path.string() + "' was written for a different configuration");
    }
  }
  io::write_file_atomic(manifest_path, dump(manifest));

  // Truth cache shared across scenarios with the same kappa.
  const fs::path truth_path = dir / "truth_cache.json";
  json truth_cache = json::object();
  if (fs::exists(truth_path)) {
    truth_cache = json::parse(io::read_file(truth_path), nullptr, false);
    if (!truth_cache.is_object()) truth_cache = json::object();
  }

  std::string summary = "scenario,n_index,kappa,method,n_success,n_failed,truth,bias,bias_mcse,ese,ese_mcse,mse,mse_mcse,"
                        "coverage,coverage_mcse,mean_model_se\n";
  std::string replicates = kRecordHeader;
  std::string ridgeline = "scenario,n_index,kappa,method,replicate,estimate\n";

  for (const auto& spec : specs) {
    const std::string key = truth_key(cfg, spec.kappa);
    simgen::TrueEffect truth;
    if (truth_cache.contains(key)) {
      truth.p1 = truth_cache[key]["p1"];
      truth.p0 = truth_cache[key]["p0"];
      truth.log_or = truth_cache[key]["log_or"];
    } else {
      truth = simgen::true_marginal_logor(spec.dgm, spec.kappa, spec.truth_cohort, spec.truth_seed);
      truth_cache[key] = truth_json(spec.dgm, spec.kappa, spec.truth_cohort, spec.truth_seed, false, truth);
      io::write_file_atomic(truth_path, dump(truth_cache));
    }

    const fs::path records_path = dir / "scenarios" / (spec.id() + ".csv");
    harness::ScenarioResult result;
    try {
      if (a.resume && fs::exists(records_path)) {
        if (!a.quiet) std::cerr << spec.id() << ": reusing completed records\n";
        result = harness::summarize_records(spec, truth, parse_records(io::read_file(records_path), records_path.string()));
      } else {
        const auto start = std::chrono::steady_clock::now();
        harness::Progress progress;
        if (!a.quiet) {
          progress = [&](std::size_t done, std::size_t total) {
            if (done == total || done % 10 == 0) std::cerr << "\r" << spec.id() << ": " << done << "/" << total << std::flush;
          };
        }
        result = harness::run_scenario(spec, truth, progress);
        if (!a.quiet) {
          const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          std::cerr << "  (" << secs << " s)\n";
        }
        io::write_file_atomic(records_path, kRecordHeader + records_csv_body(result.records));
      }
    } catch (const Error& e) {
      throw Error(e.error_class(), "scenario " + spec.id() + ": " + e.what());
    }

    for (const auto& s : result.summaries) {
      summary += spec.id() + "," + std::to_string(spec.n_index) + "," + io::format_double(spec.kappa) + "," +
                 std::string(harness::method_name(s.method)) + "," + std::to_string(s.n_success) + "," +
                 std::to_string(s.n_failed) + "," + io::format_double(s.truth) + "," + io::format_double(s.bias.value) +
                 "," + io::format_double(s.bias.mcse) + "," + io::format_double(s.ese.value) + "," +
                 io::format_double(s.ese.mcse) + "," + io::format_double(s.mse.value) + "," +
                 io::format_double(s.mse.mcse) + "," + io::format_double(s.coverage.value) + "," +
                 io::format_double(s.coverage.mcse) + "," + io::format_double(s.mean_model_se) + "\n";
    }
    replicates += records_csv_body(result.records);
    for (const auto& r : result.records) {
      if (!r.ok()) continue;
      ridgeline += spec.id() + "," + std::to_string(spec.n_index) + "," + io::format_double(spec.kappa) + "," +
                   std::string(harness::method_name(r.method)) + "," + std::to_string(r.replicate) + "," +
                   io::format_double(r.estimate) + "\n";
    }
  }

  io::write_file_atomic(dir / "summary.csv", summary);
  io::write_file_atomic(dir / "replicates.csv", replicates);
  io::write_file_atomic(dir / "ridgeline.csv", ridgeline);
  return 0;
}

// ---- stability --------------------------------------------------------------

struct StabilityArgs {
  std::string index;
  std::string target;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t chains = 2;
  std::size_t iterations = 4000;
  std::size_t burn_in = 2000;
  std::size_t thin = 4;
  double tolerance = 0.01;
  std::string out;
};

int cmd_stability(const StabilityArgs& a) {
  const IndexStudyData index = io::read_index_csv(a.index);
  index.validate();
  const TargetCovariates target =
      a.target.empty() || same_file(a.index, a.target) ? within_study_target(index) : io::read_target_csv(a.target);
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::size_t m = 0;
  for (std::uint64_t seed : a.seeds) {
    bayes::McmcConfig mcmc;
    mcmc.n_chains = a.chains;
    mcmc.iterations = a.iterations;
    mcmc.burn_in = a.burn_in;
    mcmc.thin = a.thin;
    mcmc.seed = seed;
    const mim::MimResult r = mim::mim_standardize(index, target, bayes::PriorSpec{}, mcmc);
    estimates.push_back(r.pooled.estimate);
    std_errors.push_back(std::sqrt(r.pooled.variance));
    m = r.pooled.m_used;
  }
  const auto [lo, hi] = std::minmax_element(estimates.begin(), estimates.end());
  const auto [se_lo, se_hi] = std::minmax_element(std_errors.begin(), std_errors.end());
  const double range = *hi - *lo;
  const double se_range = *se_hi - *se_lo;
  json out{{"m", m},
           {"seeds", a.seeds},
           {"estimates", estimates},
           {"std_errors", std_errors},
           {"estimate_range", range},
           {"std_error_range", se_range},
           {"estimate_sd", estimates.size() > 1 ? stats::sample_sd(estimates) : 0.0},
           {"tolerance", a.tolerance},
           {"stable", range <= a.tolerance && se_range <= a.tolerance}};
  emit(dump(out), a.out);
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::negative_variance:
      return kExitNegativeVariance;
    case ErrorClass::io:
      return kExitIo;
    case ErrorClass::schema:
      return kExitUsage;
    case ErrorClass::numerical:
      break;
  }
  return kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based standardization of marginal treatment effects"};
  app.set_version_flag("--version", std::string("mimstd ") + kVersion);
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Force the kernel instruction set")->check(CLI::IsMember({"scalar", "avx2"}));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a simulated index trial and target sample as CSV");
  simulate->add_option("--config", sim.config, "INI configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Root seed")->required();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  simulate->add_option("--n-index", sim.n_index, "Index trial size")->check(CLI::PositiveNumber);
  simulate->add_option("--kappa", sim.kappa, "Target overlap parameter in (0, 1]")->check(CLI::Range(1e-9, 1.0));

  StandardizeArgs std_args;
  auto* standardize = app.add_subcommand("standardize", "Estimate the marginal treatment effect over a target");
  standardize->add_option("--index", std_args.index, "Index study CSV (x1..xK,t,y)")->required();
  standardize->add_option("--target", std_args.target,
                          "Target covariate CSV; omit or pass the index file for within-study standardization");
  standardize->add_flag("--within-study", std_args.within_study, "Standardize over the index covariates");
  standardize->add_option("--method", std_args.method, "mim or gcomp")->check(CLI::IsMember({"mim", "gcomp"}));
  standardize->add_option("--pooling", std_args.pooling, "rules or simulation")
      ->check(CLI::IsMember({"rules", "simulation"}));
  standardize->add_option("--resamples", std_args.resamples, "Bootstrap resamples")->check(CLI::Range(2, 100000000));
  standardize->add_option("--level", std_args.level, "Interval level")->check(CLI::Range(0.5, 0.9999));
  standardize->add_option("--seed", std_args.seed, "Root seed");
  standardize->add_option("--chains", std_args.chains, "MCMC chains")->check(CLI::Range(1, 64));
  standardize->add_option("--iterations", std_args.iterations, "Iterations per chain, burn-in included");
  standardize->add_option("--burn-in", std_args.burn_in, "Burn-in iterations per chain");
  standardize->add_option("--thin", std_args.thin, "Thinning interval")->check(CLI::PositiveNumber);
  standardize->add_option("--simulation-draws", std_args.simulation_draws, "Draws for simulation pooling");
  standardize->add_flag("--allow-negative-variance", std_args.allow_negative_variance,
                        "Clamp a negative pooled variance instead of failing");
  standardize->add_flag("--skip-diagnostics", std_args.skip_diagnostics, "Do not enforce the R-hat and ESS gates");
  standardize->add_option("--scale", std_args.scale, "G-computation contrast scale")
      ->check(CLI::IsMember({"log_odds_ratio", "log_risk_ratio", "mean_difference"}));
  standardize->add_option("--out", std_args.out, "Output JSON file (default stdout)");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run the simulation study");
  benchmark->add_option("--config", bench.config, "INI configuration file")->check(CLI::ExistingFile);
  benchmark->add_option("--profile", bench.profile, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  benchmark->add_flag_callback("--quick", [&] { bench.profile = "quick"; }, "Shorthand for --profile quick");
  benchmark->add_option("--out-dir", bench.out_dir, "Output directory");
  benchmark->add_flag("--resume", bench.resume, "Reuse scenarios completed by an earlier run");
  benchmark->add_option("--workers", bench.workers, "Worker threads (default: MIMSTD_WORKERS or all cores)");
  benchmark->add_option("--scenario", bench.scenarios, "Restrict to scenario ids such as N2000_k1");
  benchmark->add_option("--replicates", bench.replicates, "Override the replicate count")->check(CLI::Range(2, 1000000));
  benchmark->add_option("--base-seed", bench.base_seed, "Override the base seed");
  benchmark->add_flag("--quiet", bench.quiet, "No progress output");

  TruthArgs truth;
  auto* truth_cmd = app.add_subcommand("truth", "Compute the true marginal and conditional log odds ratios");
  truth_cmd->add_option("--config", truth.config, "INI configuration file")->check(CLI::ExistingFile);
  truth_cmd->add_option("--kappa", truth.kappa, "Overlap parameter in (0, 1]")->required()->check(CLI::Range(1e-9, 1.0));
  truth_cmd->add_option("--cohort-size", truth.cohort, "Simulated cohort size (>= 100000)")
      ->check(CLI::Range(std::size_t{100000}, std::size_t{1000000000}));
  truth_cmd->add_option("--seed", truth.seed, "Cohort seed");
  truth_cmd->add_flag("--bernoulli", truth.bernoulli, "Average simulated outcomes instead of probabilities");
  truth_cmd->add_option("--out", truth.out, "Output JSON file (default stdout)");

  StabilityArgs stab;
  auto* stability = app.add_subcommand("stability", "Repeat MIM across seeds to judge whether M is large enough");
  stability->add_option("--index", stab.index, "Index study CSV")->required();
  stability->add_option("--target", stab.target, "Target covariate CSV");
  stability->add_option("--seeds", stab.seeds, "Seeds to repeat over")->expected(2, 1000);
  stability->add_option("--chains", stab.chains, "MCMC chains");
  stability->add_option("--iterations", stab.iterations, "Iterations per chain");
  stability->add_option("--burn-in", stab.burn_in, "Burn-in per chain");
  stability->add_option("--thin", stab.thin, "Thinning interval");
  stability->add_option("--tolerance", stab.tolerance, "Largest acceptable spread of estimates and standard errors");
  stability->add_option("--out", stab.out, "Output JSON file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (!isa.empty()) {
      if (isa == "avx2" && kernels::detected_isa() != kernels::Isa::avx2) {
        throw SchemaError("this CPU or build does not support avx2");
      }
      kernels::set_active_isa(isa == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar);
    }
    if (*simulate) return cmd_simulate(sim);
    if (*standardize) return cmd_standardize(std_args);
    if (*benchmark) return cmd_benchmark(bench);
    if (*truth_cmd) return cmd_truth(truth);
    if (*stability) return cmd_stability(stab);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
