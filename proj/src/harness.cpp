#include "mimstd/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "mimstd/errors.hpp"
#include "mimstd/random.hpp"
#include "mimstd/stats.hpp"

namespace mimstd::harness {

std::string_view method_name(Method method) noexcept {
  return method == Method::mim ? "mim" : "gcomp";
}

Method parse_method(std::string_view name) {
  if (name == "mim") return Method::mim;
  if (name == "gcomp") return Method::gcomp;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

std::string ScenarioSpec::id() const {
  std::ostringstream os;
  os << "N" << n_index << "_k" << kappa;
  return os.str();
}

void ScenarioSpec::validate() const {
  if (n_replicates < 2) throw DomainError("a scenario needs at least two replicates");
  if (methods.empty()) throw DomainError("a scenario needs at least one method");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("kappa must lie in (0, 1]");
  if (n_index < 4) throw DomainError("index trial too small");
  mcmc.validate();
  dgm.validate();
}

PerformanceSummary compute_metrics(std::span<const double> estimates, std::span<const double> variances,
                                   std::span<const double> lower, std::span<const double> upper,
                                   double truth) {
  const std::size_t s = estimates.size();
  if (s < 2) throw EmptyInput("performance measures need at least two replicates");
  if (variances.size() != s || lower.size() != s || upper.size() != s) {
    throw ShapeError("replicate columns differ in length");
  }
  const auto sd = static_cast<double>(s);
  PerformanceSummary out;
  out.n_success = s;
  out.truth = truth;

  const double mean = stats::mean(estimates);
  const double ese = stats::sample_sd(estimates);
  double mse = 0.0;
  double covered = 0.0;
  double model_se = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    mse += (estimates[i] - truth) * (estimates[i] - truth);
    if (lower[i] <= truth && truth <= upper[i]) covered += 1.0;
    model_se += std::sqrt(variances[i]);
  }
  mse /= sd;
  double mse_ss = 0.0;
  for (double e : estimates) {
    const double dev = (e - truth) * (e - truth) - mse;
    mse_ss += dev * dev;
  }
  const double p = covered / sd;

  out.bias = {mean - truth, ese / std::sqrt(sd)};
  out.ese = {ese, ese / std::sqrt(2.0 * (sd - 1.0))};
  out.mse = {mse, std::sqrt(mse_ss / (sd * (sd - 1.0)))};
  out.coverage = {p, std::sqrt(p * (1.0 - p) / sd)};
  out.mean_model_se = model_se / sd;
  return out;
}

std::pair<double, double> coverage_bounds(double level, std::size_t n_replicates) {
  const double half = 1.96 * std::sqrt(level * (1.0 - level) / static_cast<double>(n_replicates));
  return {level - half, level + half};
}

std::uint64_t replicate_seed(const ScenarioSpec& spec, std::size_t replicate) {
  const auto kappa_key = static_cast<std::uint64_t>(std::llround(spec.kappa * 1e6));
  return derive_seed(spec.base_seed, {static_cast<std::uint64_t>(spec.n_index), kappa_key,
                                      static_cast<std::uint64_t>(replicate)});
}

std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec, std::size_t replicate, double truth) {
  const std::uint64_t seed = replicate_seed(spec, replicate);
  simgen::DgmConfig dgm = spec.dgm;
  dgm.n_index = spec.n_index;
  const IndexStudyData index = simgen::simulate_index_trial(dgm, seed);
  const TargetCovariates target = simgen::simulate_target(dgm, spec.kappa, seed);

  std::vector<ReplicateRecord> records;
  for (Method method : spec.methods) {
    ReplicateRecord rec;
    rec.scenario = spec.id();
    rec.replicate = replicate;
    rec.method = method;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (method == Method::mim) {
        bayes::McmcConfig mcmc = spec.mcmc;
        mcmc.seed = derive_seed(seed, Stream::mcmc);
        mim::MimOptions options = spec.mim;
        options.level = spec.level;
        const mim::MimResult r = mim::mim_standardize(index, target, spec.prior, mcmc, options);
        rec.estimate = r.pooled.estimate;
        rec.variance = r.pooled.variance;
        rec.lower = r.pooled.lower;
        rec.upper = r.pooled.upper;
      } else {
        gcomp::BootstrapConfig boot = spec.bootstrap;
        boot.seed = derive_seed(seed, Stream::bootstrap);
        const gcomp::GcompResult r =
            gcomp::gcomp_bootstrap(index, target, gcomp::EffectScale::log_odds_ratio, boot, spec.level);
        rec.estimate = r.estimate;
        rec.variance = r.std_error * r.std_error;
        rec.lower = r.lower;
        rec.upper = r.upper;
      }
      rec.covered = rec.lower <= truth && truth <= rec.upper;
    } catch (const Error& e) {
      rec.failure = e.what();
    }
    rec.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    records.push_back(std::move(rec));
  }
  return records;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, std::optional<simgen::TrueEffect> truth,
                            const Progress& progress) {
  spec.validate();
  ScenarioResult result;
  result.scenario = spec.id();
  result.truth = truth ? *truth
                       : simgen::true_marginal_logor(spec.dgm, spec.kappa, spec.truth_cohort, spec.truth_seed);

  std::vector<std::vector<ReplicateRecord>> slots(spec.n_replicates);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= spec.n_replicates) return;
      try {
        slots[r] = run_replicate(spec, r, result.truth.log_or);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(spec.n_replicates);
        return;
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, spec.n_replicates);
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(spec.workers, spec.n_replicates));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ReplicateRecord> records;
  for (auto& slot : slots) {
    for (auto& rec : slot) records.push_back(std::move(rec));
  }
  return summarize_records(spec, result.truth, std::move(records));
}

ScenarioResult summarize_records(const ScenarioSpec& spec, const simgen::TrueEffect& truth,
                                 std::vector<ReplicateRecord> records) {
  ScenarioResult result;
  result.scenario = spec.id();
  result.truth = truth;
  result.records = std::move(records);
  for (Method method : spec.methods) {
    std::vector<double> est;
    std::vector<double> var;
    std::vector<double> lo;
    std::vector<double> hi;
    std::size_t failed = 0;
    for (const auto& rec : result.records) {
      if (rec.method != method) continue;
      if (!rec.ok()) {
        ++failed;
        continue;
      }
      est.push_back(rec.estimate);
      var.push_back(rec.variance);
      lo.push_back(rec.lower);
      hi.push_back(rec.upper);
    }
    if (static_cast<double>(failed) > spec.max_failure_fraction * static_cast<double>(spec.n_replicates)) {
      throw TooManyFailures(std::string(method_name(method)) + " failed on " + std::to_string(failed) + " of " +
                            std::to_string(spec.n_replicates) + " replicates in scenario " + spec.id());
    }
    PerformanceSummary summary = compute_metrics(est, var, lo, hi, result.truth.log_or);
    summary.method = method;
    summary.n_failed = failed;
    result.summaries.push_back(summary);
  }
  return result;
}

}  // namespace mimstd::harness
