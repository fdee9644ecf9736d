#pragma once

// Simulation-study data generation: correlated normal covariates, a two-arm
// index trial with a logistic outcome model containing treatment-covariate
// interactions, target samples whose means are shifted by an overlap
// parameter kappa, and the true marginal log odds ratio by cohort averaging.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mimstd/data.hpp"
#include "mimstd/glm.hpp"

namespace mimstd::simgen {

struct DgmConfig {
  std::vector<double> means{1.0, 0.5};
  std::vector<double> sds{0.5, 0.2};
  double rho = 0.15;  // common pairwise correlation
  double beta0 = -0.5;
  std::vector<double> beta1{1.0, 0.4};  // prognostic effects, 2 * sd
  std::vector<double> beta2{0.5, 0.2};  // interactions, sd
  double beta_t = -1.5;
  std::size_t n_index = 500;
  std::size_t n_target = 2000;

  /// Default mechanism for a given index-trial size.
  static DgmConfig standard(std::size_t n_index);

  std::size_t n_covariates() const noexcept { return means.size(); }

  /// Coefficients in design order [beta0, beta1..., beta_t, beta2...].
  Vector coefficients() const;

  /// Throws DomainError on inconsistent lengths or non-positive sds, and
  /// NotPositiveDefinite when the correlation matrix is not.
  void validate() const;
};

struct TargetShift {
  double kappa = 1.0;
  std::vector<double> means;
  std::vector<double> sds;
};

/// n x K draws from the normal distribution with the given marginals and a
/// common correlation rho (a Gaussian copula with normal margins).
Matrix sample_covariates(const std::vector<double>& means, const std::vector<double>& sds, double rho,
                         std::size_t n, std::uint64_t seed);

/// Exactly floor(N/2) treated subjects, rows shuffled, Bernoulli outcomes from
/// the true model.
IndexStudyData simulate_index_trial(const DgmConfig& cfg, std::uint64_t seed);

/// Means m_k (1.1 + (1 - kappa)^2), sds 0.75 sd_k. Throws DomainError unless
/// 0 < kappa <= 1.
TargetShift target_distribution(const DgmConfig& cfg, double kappa);

/// `n` defaults to cfg.n_target when zero.
TargetCovariates simulate_target(const DgmConfig& cfg, double kappa, std::uint64_t seed, std::size_t n = 0);

struct TrueEffect {
  double p1 = 0.0;
  double p0 = 0.0;
  double log_or = 0.0;
};

inline constexpr std::size_t kDefaultCohort = 2'000'000;

/// Marginal outcome probabilities under each treatment in a simulated target
/// cohort and their log odds ratio. By default each subject contributes its
/// expected outcome; `bernoulli_outcomes` averages simulated 0/1 outcomes
/// instead. Throws DomainError when the cohort is smaller than 1e5.
TrueEffect true_marginal_logor(const DgmConfig& cfg, double kappa, std::size_t cohort_size = kDefaultCohort,
                               std::uint64_t seed = 1, bool bernoulli_outcomes = false);

/// Conditional log odds ratio at the target covariate means.
double true_conditional_at_means(const DgmConfig& cfg, double kappa);

}  // namespace mimstd::simgen
