#pragma once

// Multiple imputation marginalization: outcomes are synthesized from the
// posterior predictive distribution of the first-stage outcome model over a
// doubled target sample (one copy under each treatment), each synthesis is
// analyzed with a marginal regression of outcome on treatment, and the
// per-synthesis estimates are pooled.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mimstd/bayes_glm.hpp"
#include "mimstd/data.hpp"
#include "mimstd/glm.hpp"

namespace mimstd::mim {

/// Target covariates stacked twice: rows [0, n_target) carry t = 1, rows
/// [n_target, 2 n_target) repeat them with t = 0.
struct AugmentedTarget {
  Matrix covariates;
  Vector treatment;
  std::size_t n_target = 0;

  std::size_t n_star() const noexcept { return 2 * n_target; }
};

AugmentedTarget augment_target(const TargetCovariates& target);

struct SynthesisSet {
  std::vector<std::vector<std::uint8_t>> outcomes;  // M vectors of length N*

  std::size_t size() const noexcept { return outcomes.size(); }
};

/// Synthesis m draws its outcomes at coefficient row m of `draws` from the
/// stream derive_seed(seed, Stream::synthesis, m).
SynthesisSet generate_syntheses(const Matrix& draws, const AugmentedTarget& aug, std::uint64_t seed);

struct SecondStageFit {
  double delta = 0.0;
  double variance = 0.0;
};

/// Maximum-likelihood regression of a synthesis on treatment alone. With a
/// single binary regressor the model is saturated, so the MLE is the pair of
/// arm event rates and the Wald variance has a closed form. Throws
/// DegenerateSynthesisError when an arm is all 0 or all 1.
SecondStageFit second_stage_fit(std::span<const std::uint8_t> synthesis, const Vector& treatment,
                                glm::Link link = glm::Link{});

struct SecondStageEstimates {
  std::vector<double> deltas;
  std::vector<double> variances;

  std::size_t size() const noexcept { return deltas.size(); }
  void validate() const;
};

enum class PoolingMethod { combining_rules, posterior_simulation };

std::string_view pooling_name(PoolingMethod method) noexcept;

struct PooledResult {
  double estimate = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double dof = 0.0;
  PoolingMethod method = PoolingMethod::combining_rules;
  std::size_t m_used = 0;
  double delta_bar = 0.0;
  double v_bar = 0.0;
  double b = 0.0;
  bool variance_clamped = false;
  /// Posterior simulation only: draws whose variance component was not positive.
  std::size_t nonpositive_draws = 0;
};

/// Negative-variance floor used when clamping is requested.
inline constexpr double kVarianceFloor = 1e-12;

/// Delta = mean of the estimates; V = (1 + 1/M) b - v_bar; the interval uses a
/// t distribution with nu_f = (M - 1)(1 + v_bar / ((1 + 1/M) b))^2 dof.
/// Throws NegativeVarianceError when V <= 0 unless `clamp_negative` is set.
PooledResult pool_combining_rules(const SecondStageEstimates& est, double level = 0.95,
                                  bool clamp_negative = false);

/// Monte Carlo integration of the posterior of the marginal effect. Draws
/// with a non-positive variance component are dropped, and more than half of
/// them non-positive throws NegativeVarianceError. With `clamp_negative` they
/// are floored at kVarianceFloor instead and nothing is thrown.
PooledResult pool_posterior_simulation(const SecondStageEstimates& est, std::size_t n_draws,
                                       std::uint64_t seed, double level = 0.95,
                                       bool clamp_negative = false);

struct MimOptions {
  PoolingMethod pooling = PoolingMethod::combining_rules;
  double level = 0.95;
  std::size_t simulation_draws = 100000;
  bool clamp_negative_variance = false;
  glm::Link second_stage_link{glm::LinkKind::logit};
  /// Largest tolerated share of degenerate syntheses.
  double max_degenerate_fraction = 0.01;
};

struct MimResult {
  PooledResult pooled;
  std::size_t m_generated = 0;
  std::size_t n_degenerate = 0;
  diagnostics::ParameterDiagnostics diagnostics;
  double acceptance_rate = 0.0;
};

/// Full pipeline: posterior sampling, thinning, augmentation, synthesis,
/// second-stage fits and pooling. All randomness derives from `mcmc.seed`.
/// Throws PoolingPolicyError when more than `max_degenerate_fraction` of the
/// syntheses are degenerate; other component errors propagate.
MimResult mim_standardize(const IndexStudyData& index, const TargetCovariates& target,
                          const bayes::PriorSpec& prior, const bayes::McmcConfig& mcmc,
                          const MimOptions& options = {});

}  // namespace mimstd::mim
