#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mimstd/bayes_glm.hpp"
#include "mimstd/gcomp.hpp"
#include "mimstd/mim.hpp"
#include "mimstd/simgen.hpp"

namespace mimstd::harness {

enum class Method { mim, gcomp };

std::string_view method_name(Method method) noexcept;
Method parse_method(std::string_view name);

struct ScenarioSpec {
  std::size_t n_index = 500;
  double kappa = 1.0;
  std::size_t n_replicates = 1000;
  std::vector<Method> methods{Method::mim, Method::gcomp};
  std::uint64_t base_seed = 20240101;

  simgen::DgmConfig dgm;  // n_index is taken from the field above
  bayes::PriorSpec prior;
  bayes::McmcConfig mcmc;  // seed is derived per replicate
  mim::MimOptions mim;
  gcomp::BootstrapConfig bootstrap;  // seed is derived per replicate
  double level = 0.95;

  std::size_t truth_cohort = simgen::kDefaultCohort;
  std::uint64_t truth_seed = 1;

  /// A method failing on more than this share of replicates aborts the scenario.
  double max_failure_fraction = 0.02;
  std::size_t workers = 1;

  /// Stable identifier, e.g. "N500_k0.5".
  std::string id() const;
  void validate() const;
};

struct ReplicateRecord {
  std::string scenario;
  std::size_t replicate = 0;
  Method method = Method::mim;
  double estimate = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
  double runtime_seconds = 0.0;
  std::string failure;  // empty on success

  bool ok() const noexcept { return failure.empty(); }
};

struct Metric {
  double value = 0.0;
  double mcse = 0.0;
};

struct PerformanceSummary {
  Method method = Method::mim;
  std::size_t n_success = 0;
  std::size_t n_failed = 0;
  double truth = 0.0;
  Metric bias;
  Metric ese;
  Metric mse;
  Metric coverage;
  double mean_model_se = 0.0;  // average of sqrt(variance)
};

/// Performance measures over S >= 2 replicates with their Monte Carlo
/// standard errors:
///   MCSE(bias) = ESE / sqrt(S)
///   MCSE(ESE)  = ESE / sqrt(2 (S - 1))
///   MCSE(MSE)  = sqrt(sum(((est - truth)^2 - MSE)^2) / (S (S - 1)))
///   MCSE(cov)  = sqrt(p (1 - p) / S)
PerformanceSummary compute_metrics(std::span<const double> estimates, std::span<const double> variances,
                                   std::span<const double> lower, std::span<const double> upper,
                                   double truth);

/// level -/+ 1.96 sqrt(level (1 - level) / S)
std::pair<double, double> coverage_bounds(double level = 0.95, std::size_t n_replicates = 1000);

/// Root seed of replicate r; every random stream of that replicate derives from it.
std::uint64_t replicate_seed(const ScenarioSpec& spec, std::size_t replicate);

struct ScenarioResult {
  std::string scenario;
  simgen::TrueEffect truth;
  std::vector<PerformanceSummary> summaries;  // one per method, in spec order
  std::vector<ReplicateRecord> records;       // replicate-major, methods in spec order
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every replicate of a scenario on `spec.workers` threads. Both methods
/// see the same simulated index and target data within a replicate, and the
/// result does not depend on the worker count. `truth` skips the cohort
/// simulation when supplied. Throws TooManyFailures.
ScenarioResult run_scenario(const ScenarioSpec& spec, std::optional<simgen::TrueEffect> truth = std::nullopt,
                            const Progress& progress = {});

/// Folds replicate records (replicate-major, as produced by run_scenario) into
/// per-method summaries. Throws TooManyFailures.
ScenarioResult summarize_records(const ScenarioSpec& spec, const simgen::TrueEffect& truth,
                                 std::vector<ReplicateRecord> records);

/// Runs one replicate; exposed for tests and for the CLI's resume logic.
std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec, std::size_t replicate, double truth);

}  // namespace mimstd::harness
