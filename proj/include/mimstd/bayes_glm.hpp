#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mimstd/diagnostics.hpp"
#include "mimstd/glm.hpp"
#include "mimstd/random.hpp"

namespace mimstd::bayes {

/// Independent normal(0, scale) priors on the logistic-regression coefficients.
///
/// With `autoscale`, the coefficient of design column j > 0 gets scale
/// `coefficient_scale / sd(column j)` (sample sd; constant columns keep the
/// unscaled value). The intercept (column 0) always gets `intercept_scale`.
/// A non-empty `scales` vector replaces the rule entirely.
struct PriorSpec {
  double intercept_scale = 2.5;
  double coefficient_scale = 2.5;
  bool autoscale = true;
  std::vector<double> scales;

  /// Per-column prior scales for `design`. Throws DomainError on a
  /// non-positive scale and ShapeError on a length mismatch.
  std::vector<double> resolve(const Matrix& design) const;
};

struct McmcConfig {
  std::size_t n_chains = 2;
  std::size_t iterations = 4000;  // per chain, burn-in included
  std::size_t burn_in = 2000;
  std::size_t thin = 4;
  std::uint64_t seed = 20240101;
  /// Fraction of iterations that use the Laplace independence proposal; the
  /// rest are adaptive random-walk steps.
  double independence_probability = 0.7;
  /// Throw ConvergenceError when the gates below fail.
  bool enforce_diagnostics = true;
  double max_rhat = 1.05;
  double min_ess = 400.0;

  void validate() const;
  /// Retained draws L across all chains.
  std::size_t retained() const noexcept { return n_chains * (iterations - burn_in); }
  /// Number of thinned draws M = floor(L / thin).
  std::size_t thinned() const noexcept { return retained() / thin; }
};

struct PosteriorDraws {
  Matrix draws;  // L x P, chains stacked in order
  std::size_t n_chains = 0;
  diagnostics::ParameterDiagnostics diagnostics;
  double acceptance_rate = 0.0;
  Vector laplace_mode;
  Matrix laplace_covariance;
};

/// Samples the logistic-regression posterior with a Metropolis-Hastings
/// kernel mixing an adaptive random walk and a multivariate-t independence
/// proposal centered on the Laplace approximation. Identical inputs and
/// seed give bit-identical draws.
///
/// A design with zero rows samples the prior alone. SeparationError from the
/// maximum-likelihood initialization propagates; ConvergenceError is thrown
/// when `enforce_diagnostics` is set and R-hat or ESS fail their gates.
PosteriorDraws sample_posterior(const Matrix& design, const Vector& outcomes, const PriorSpec& prior,
                                const McmcConfig& cfg);

/// One Bernoulli outcome per design row at coefficients `beta`.
std::vector<std::uint8_t> posterior_predictive_draw(const Vector& beta, const Matrix& design,
                                                    Engine& rng);

/// Every `thin`-th retained row starting with the first; floor(L / thin) rows.
Matrix thin_draws(const PosteriorDraws& draws, std::size_t thin);

}  // namespace mimstd::bayes
