#include "mimstd/mim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "mimstd/errors.hpp"
#include "mimstd/random.hpp"
#include "mimstd/stats.hpp"

namespace mimstd::mim {

namespace {

struct Summaries {
  double delta_bar;
  double v_bar;
  double b;
};

// Estimates are pooled in sorted order so the result depends only on the
// multiset of (delta, v) pairs, bit for bit.
std::vector<std::pair<double, double>> sorted_pairs(const SecondStageEstimates& est) {
  std::vector<std::pair<double, double>> pairs(est.size());
  for (std::size_t m = 0; m < est.size(); ++m) pairs[m] = {est.deltas[m], est.variances[m]};
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Summaries summarize(const SecondStageEstimates& est) {
  est.validate();
  if (est.size() < 2) throw EmptyInput("pooling needs at least two syntheses");
  const auto pairs = sorted_pairs(est);
  const auto m = static_cast<double>(pairs.size());
  double sd = 0.0;
  double sv = 0.0;
  for (const auto& [d, v] : pairs) {
    sd += d;
    sv += v;
  }
  Summaries s{sd / m, sv / m, 0.0};
  double ss = 0.0;
  for (const auto& [d, v] : pairs) ss += (d - s.delta_bar) * (d - s.delta_bar);
  s.b = ss / (m - 1.0);
  return s;
}

std::vector<std::uint8_t> synthesize(const Matrix& draws, Eigen::Index m, const Matrix& design,
                                     std::uint64_t seed) {
  Engine eng = make_engine(derive_seed(seed, Stream::synthesis, static_cast<std::uint64_t>(m)));
  return bayes::posterior_predictive_draw(draws.row(m).transpose(), design, eng);
}

}  // namespace

AugmentedTarget augment_target(const TargetCovariates& target) {
  const Eigen::Index n = target.covariates.rows();
  if (n < 1) throw EmptyInput("target covariate table is empty");
  AugmentedTarget aug;
  aug.n_target = static_cast<std::size_t>(n);
  aug.covariates.resize(2 * n, target.covariates.cols());
  aug.covariates.topRows(n) = target.covariates;
  aug.covariates.bottomRows(n) = target.covariates;
  aug.treatment.resize(2 * n);
  aug.treatment.head(n).setOnes();
  aug.treatment.tail(n).setZero();
  return aug;
}

SynthesisSet generate_syntheses(const Matrix& draws, const AugmentedTarget& aug, std::uint64_t seed) {
  const glm::DesignSpec spec{static_cast<std::size_t>(aug.covariates.cols()), true};
  if (static_cast<std::size_t>(draws.cols()) != spec.width()) {
    throw ShapeError("draw width " + std::to_string(draws.cols()) + " does not match design width " +
                     std::to_string(spec.width()));
  }
  const Matrix design = glm::build_design(aug.covariates, aug.treatment, spec);
  SynthesisSet set;
  set.outcomes.reserve(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index m = 0; m < draws.rows(); ++m) set.outcomes.push_back(synthesize(draws, m, design, seed));
  return set;
}

SecondStageFit second_stage_fit(std::span<const std::uint8_t> synthesis, const Vector& treatment,
                                glm::Link link) {
  if (static_cast<Eigen::Index>(synthesis.size()) != treatment.size()) {
    throw ShapeError("synthesis and treatment lengths differ");
  }
  double n1 = 0.0;
  double e1 = 0.0;
  double n0 = 0.0;
  double e0 = 0.0;
  for (std::size_t j = 0; j < synthesis.size(); ++j) {
    const double t = treatment[static_cast<Eigen::Index>(j)];
    if (t == 1.0) {
      n1 += 1.0;
      e1 += synthesis[j];
    } else if (t == 0.0) {
      n0 += 1.0;
      e0 += synthesis[j];
    } else {
      throw DomainError("treatment entries must be 0/1");
    }
  }
  if (n1 == 0.0 || n0 == 0.0) throw DegenerateSynthesisError("a treatment arm is empty");
  if (e1 == 0.0 || e1 == n1 || e0 == 0.0 || e0 == n0) {
    throw DegenerateSynthesisError("a treatment arm has all-0 or all-1 outcomes");
  }
  const double p1 = e1 / n1;
  const double p0 = e0 / n0;
  switch (link.kind()) {
    case glm::LinkKind::logit:
      return {link.apply(p1) - link.apply(p0), 1.0 / e1 + 1.0 / (n1 - e1) + 1.0 / e0 + 1.0 / (n0 - e0)};
    case glm::LinkKind::log:
      return {std::log(p1) - std::log(p0), (1.0 - p1) / e1 + (1.0 - p0) / e0};
    case glm::LinkKind::identity:
      return {p1 - p0, p1 * (1.0 - p1) / n1 + p0 * (1.0 - p0) / n0};
  }
  return {};
}

void SecondStageEstimates::validate() const {
  if (deltas.size() != variances.size()) throw ShapeError("deltas and variances differ in length");
  for (double v : variances) {
    if (!(v > 0.0)) throw DomainError("second-stage variances must be positive");
  }
}

std::string_view pooling_name(PoolingMethod method) noexcept {
  return method == PoolingMethod::combining_rules ? "combining_rules" : "posterior_simulation";
}

PooledResult pool_combining_rules(const SecondStageEstimates& est, double level, bool clamp_negative) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
  const Summaries s = summarize(est);
  const auto m = static_cast<double>(est.size());
  const double inflated_b = (1.0 + 1.0 / m) * s.b;

  PooledResult r;
  r.method = PoolingMethod::combining_rules;
  r.level = level;
  r.m_used = est.size();
  r.delta_bar = s.delta_bar;
  r.v_bar = s.v_bar;
  r.b = s.b;
  r.estimate = s.delta_bar;
  r.variance = inflated_b - s.v_bar;
  if (!(r.variance > 0.0)) {
    if (!clamp_negative) {
      throw NegativeVarianceError("pooled variance (1 + 1/M) b - v_bar = " + std::to_string(r.variance) +
                                  " is not positive; increase M or the synthesis size");
    }
    r.variance = kVarianceFloor;
    r.variance_clamped = true;
  }
  r.dof = inflated_b > 0.0 ? (m - 1.0) * std::pow(1.0 + s.v_bar / inflated_b, 2.0)
                           : std::numeric_limits<double>::infinity();
  const double half = stats::t_quantile((1.0 + level) / 2.0, r.dof) * std::sqrt(r.variance);
  r.lower = r.estimate - half;
  r.upper = r.estimate + half;
  return r;
}

PooledResult pool_posterior_simulation(const SecondStageEstimates& est, std::size_t n_draws,
                                       std::uint64_t seed, double level, bool clamp_negative) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
  if (n_draws < 2) throw DomainError("posterior simulation needs at least two draws");
  const Summaries s = summarize(est);
  const auto m = static_cast<double>(est.size());

  Engine eng = make_engine(derive_seed(seed, Stream::pooling));
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(m - 1.0);
  std::student_t_distribution<double> student(m - 1.0);
  const double mean_sd = std::sqrt(s.v_bar / m);

  std::vector<double> delta;
  delta.reserve(n_draws);
  std::size_t nonpositive = 0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const double mu = s.delta_bar + mean_sd * normal(eng);
    double sigma2 = (m - 1.0) * s.b / chi2(eng) - s.v_bar;
    const double t = student(eng);
    if (!(sigma2 > 0.0)) {
      ++nonpositive;
      if (!clamp_negative) continue;
      sigma2 = kVarianceFloor;
    }
    delta.push_back(mu + std::sqrt((1.0 + 1.0 / m) * sigma2) * t);
  }
  if (!clamp_negative && 2 * nonpositive > n_draws) {
    throw NegativeVarianceError(std::to_string(nonpositive) + " of " + std::to_string(n_draws) +
                                " posterior draws gave a non-positive variance component");
  }

  PooledResult r;
  r.method = PoolingMethod::posterior_simulation;
  r.level = level;
  r.m_used = est.size();
  r.delta_bar = s.delta_bar;
  r.v_bar = s.v_bar;
  r.b = s.b;
  r.dof = m - 1.0;
  r.nonpositive_draws = nonpositive;
  r.variance_clamped = clamp_negative && nonpositive > 0;
  r.estimate = stats::mean(delta);
  r.variance = stats::sample_variance(delta);
  std::sort(delta.begin(), delta.end());
  r.lower = stats::quantile_type7_sorted(delta, (1.0 - level) / 2.0);
  r.upper = stats::quantile_type7_sorted(delta, (1.0 + level) / 2.0);
  return r;
}

MimResult mim_standardize(const IndexStudyData& index, const TargetCovariates& target,
                          const bayes::PriorSpec& prior, const bayes::McmcConfig& mcmc,
                          const MimOptions& options) {
  index.validate();
  if (target.n_covariates() != index.n_covariates()) {
    throw ShapeError("index has " + std::to_string(index.n_covariates()) + " covariates, target has " +
                     std::to_string(target.n_covariates()));
  }
  const glm::DesignSpec spec{index.n_covariates(), true};
  const Matrix design = glm::build_design(index.covariates, index.treatment, spec);
  const bayes::PosteriorDraws posterior = bayes::sample_posterior(design, index.outcome, prior, mcmc);
  const Matrix thinned = bayes::thin_draws(posterior, mcmc.thin);

  const AugmentedTarget aug = augment_target(target);
  const Matrix aug_design = glm::build_design(aug.covariates, aug.treatment, spec);

  MimResult result;
  result.m_generated = static_cast<std::size_t>(thinned.rows());
  result.diagnostics = posterior.diagnostics;
  result.acceptance_rate = posterior.acceptance_rate;

  SecondStageEstimates est;
  for (Eigen::Index m = 0; m < thinned.rows(); ++m) {
    const auto y = synthesize(thinned, m, aug_design, mcmc.seed);
    try {
      const SecondStageFit fit = second_stage_fit(y, aug.treatment, options.second_stage_link);
      est.deltas.push_back(fit.delta);
      est.variances.push_back(fit.variance);
    } catch (const DegenerateSynthesisError&) {
      ++result.n_degenerate;
    }
  }
  if (static_cast<double>(result.n_degenerate) >
      options.max_degenerate_fraction * static_cast<double>(result.m_generated)) {
    throw PoolingPolicyError(std::to_string(result.n_degenerate) + " of " +
                             std::to_string(result.m_generated) + " syntheses were degenerate");
  }

  result.pooled = options.pooling == PoolingMethod::combining_rules
                      ? pool_combining_rules(est, options.level, options.clamp_negative_variance)
                      : pool_posterior_simulation(est, options.simulation_draws, mcmc.seed, options.level,
                                                  options.clamp_negative_variance);
  return result;
}

}  // namespace mimstd::mim
