#pragma once

// Benchmark run configuration. Profiles supply defaults, an INI file
// overrides them, and command-line flags override the file.
//
//   [benchmark]  profile, replicates, n_index (list), kappa (list), methods,
//                base_seed, workers, level, truth_cohort, truth_seed,
//                max_failure_fraction
//   [mcmc]       chains, iterations, burn_in, thin, independence_probability
//   [prior]      intercept_scale, coefficient_scale, autoscale
//   [bootstrap]  resamples
//   [mim]        pooling (rules | simulation), simulation_draws,
//                clamp_negative_variance
//   [dgm]        means, sds, rho, beta0, beta1, beta2, beta_t, n_target
//
// Lists are comma-separated.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mimstd/harness.hpp"

namespace mimstd::config {

enum class Profile { quick, full };

Profile parse_profile(const std::string& name);
std::string profile_name(Profile profile);

struct RunConfig {
  Profile profile = Profile::full;
  std::vector<std::size_t> n_index{500, 1000, 2000};
  std::vector<double> kappas{0.5, 1.0};
  harness::ScenarioSpec base;

  /// One spec per (kappa, n_index) pair, kappa-major.
  std::vector<harness::ScenarioSpec> scenarios() const;

  /// Deterministic text rendering of every setting; hashed into manifests.
  std::string canonical() const;
};

RunConfig defaults(Profile profile);

/// Parses INI text over the defaults of the profile named in [benchmark], or
/// `profile_override` when given. Throws SchemaError on unknown keys or bad values.
RunConfig parse_config(const std::string& ini_text, const std::string& profile_override = "");

RunConfig load_config(const std::filesystem::path& path, const std::string& profile_override = "");

}  // namespace mimstd::config
