#pragma once

// Parametric G-computation: maximum-likelihood outcome model, averaging of
// predicted means under each treatment over the target covariates, and a
// contrast on the chosen scale. Inference by the ordinary non-parametric
// bootstrap of index-study rows with the target held fixed.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "mimstd/data.hpp"
#include "mimstd/glm.hpp"

namespace mimstd::gcomp {

enum class EffectScale { mean_difference, log_risk_ratio, log_odds_ratio };

std::string_view scale_name(EffectScale scale) noexcept;

/// g(mean_treated) - g(mean_control). Throws DomainError when a log scale
/// receives a mean on its boundary.
double contrast(double mean_treated, double mean_control, EffectScale scale);

struct Marginal {
  double mean_treated = 0.0;
  double mean_control = 0.0;
  double contrast = 0.0;
};

/// Requires a model fitted through the covariate/treatment overload of
/// glm::fit_mle (or one with `spec` set by hand).
Marginal marginalize(const glm::FittedGlm& model, const TargetCovariates& target, EffectScale scale);

/// Plug-in estimate: interaction-design MLE on the index data, marginalized
/// over the target.
double gcomp_point(const IndexStudyData& index, const TargetCovariates& target, EffectScale scale);

struct BootstrapConfig {
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 20240101;
  /// Largest tolerated share of resamples whose fit fails.
  double max_failure_fraction = 0.01;
};

struct GcompResult {
  double estimate = 0.0;   // mean of the resample estimates
  double std_error = 0.0;  // their standard deviation
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t n_resamples_used = 0;
  std::size_t n_failed_resamples = 0;
  double plug_in = 0.0;  // gcomp_point on the original data
};

/// Percentile bootstrap. The interval bounds are type-7 quantiles at
/// (1 - level)/2 and (1 + level)/2 of the resample estimates. Index rows are
/// put in a canonical order before resampling, so shuffling the input rows
/// does not change the result. Throws ResampleFailureError when more than
/// `max_failure_fraction` of the resamples fail to fit.
GcompResult gcomp_bootstrap(const IndexStudyData& index, const TargetCovariates& target,
                            EffectScale scale, const BootstrapConfig& cfg, double level = 0.95);

}  // namespace mimstd::gcomp
