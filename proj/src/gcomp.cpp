#include "mimstd/gcomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mimstd/errors.hpp"
#include "mimstd/kernels.hpp"
#include "mimstd/random.hpp"
#include "mimstd/stats.hpp"

namespace mimstd::gcomp {

namespace {

struct TargetDesigns {
  Matrix treated;
  Matrix control;
};

TargetDesigns target_designs(const TargetCovariates& target, const glm::DesignSpec& spec) {
  if (target.n_covariates() != spec.n_covariates) {
    throw ShapeError("target has " + std::to_string(target.n_covariates()) + " covariates, model expects " +
                     std::to_string(spec.n_covariates));
  }
  if (target.size() == 0) throw EmptyInput("target covariate table is empty");
  return {glm::build_design(target.covariates, 1, spec), glm::build_design(target.covariates, 0, spec)};
}

double mean_prediction(const glm::FittedGlm& model, const Matrix& design) {
  if (model.link.kind() == glm::LinkKind::logit) {
    const Vector eta = glm::linear_predictor(model.coefficients, design);
    return kernels::sum_inv_logit({eta.data(), static_cast<std::size_t>(eta.size())}) /
           static_cast<double>(eta.size());
  }
  return glm::predict_mean(model, design).mean();
}

Marginal marginal_from(const glm::FittedGlm& model, const TargetDesigns& designs, EffectScale scale) {
  Marginal m;
  m.mean_treated = mean_prediction(model, designs.treated);
  m.mean_control = mean_prediction(model, designs.control);
  m.contrast = contrast(m.mean_treated, m.mean_control, scale);
  return m;
}

glm::FittedGlm fit_outcome_model(const IndexStudyData& index) {
  const glm::DesignSpec spec{index.n_covariates(), true};
  glm::FittedGlm fit = glm::fit_mle(index.covariates, index.treatment, index.outcome, spec);
  if (!fit.converged) {
    throw ConvergenceError("outcome model did not converge in " + std::to_string(fit.iterations) +
                           " IRLS iterations");
  }
  return fit;
}

// Lexicographic order on (x_1..x_K, t, y).
IndexStudyData canonical_order(const IndexStudyData& index) {
  const Eigen::Index n = index.covariates.rows();
  const Eigen::Index k = index.covariates.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (index.covariates(a, j) != index.covariates(b, j)) return index.covariates(a, j) < index.covariates(b, j);
    }
    if (index.treatment[a] != index.treatment[b]) return index.treatment[a] < index.treatment[b];
    return index.outcome[a] < index.outcome[b];
  });
  IndexStudyData out;
  out.covariates.resize(n, k);
  out.treatment.resize(n);
  out.outcome.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.covariates.row(i) = index.covariates.row(order[static_cast<std::size_t>(i)]);
    out.treatment[i] = index.treatment[order[static_cast<std::size_t>(i)]];
    out.outcome[i] = index.outcome[order[static_cast<std::size_t>(i)]];
  }
  return out;
}

}  // namespace

std::string_view scale_name(EffectScale scale) noexcept {
  switch (scale) {
    case EffectScale::mean_difference:
      return "mean_difference";
    case EffectScale::log_risk_ratio:
      return "log_risk_ratio";
    case EffectScale::log_odds_ratio:
      break;
  }
  return "log_odds_ratio";
}

double contrast(double mean_treated, double mean_control, EffectScale scale) {
  switch (scale) {
    case EffectScale::mean_difference:
      return mean_treated - mean_control;
    case EffectScale::log_risk_ratio: {
      const glm::Link link{glm::LinkKind::log};
      return link.apply(mean_treated) - link.apply(mean_control);
    }
    case EffectScale::log_odds_ratio: {
      const glm::Link link{glm::LinkKind::logit};
      return link.apply(mean_treated) - link.apply(mean_control);
    }
  }
  return 0.0;
}

Marginal marginalize(const glm::FittedGlm& model, const TargetCovariates& target, EffectScale scale) {
  if (!model.spec) throw ShapeError("model carries no design layout; fit it from covariates and treatment");
  return marginal_from(model, target_designs(target, *model.spec), scale);
}

double gcomp_point(const IndexStudyData& index, const TargetCovariates& target, EffectScale scale) {
  index.validate();
  return marginalize(fit_outcome_model(index), target, scale).contrast;
}

GcompResult gcomp_bootstrap(const IndexStudyData& index, const TargetCovariates& target,
                            EffectScale scale, const BootstrapConfig& cfg, double level) {
  index.validate();
  if (cfg.n_resamples < 2) throw DomainError("bootstrap needs at least two resamples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");

  const IndexStudyData sorted = canonical_order(index);
  const glm::DesignSpec spec{index.n_covariates(), true};
  const TargetDesigns designs = target_designs(target, spec);
  const Eigen::Index n = sorted.covariates.rows();

  GcompResult res;
  res.level = level;
  res.plug_in = marginal_from(fit_outcome_model(sorted), designs, scale).contrast;

  std::vector<double> estimates;
  estimates.reserve(cfg.n_resamples);
  IndexStudyData boot;
  boot.covariates.resize(n, sorted.covariates.cols());
  boot.treatment.resize(n);
  boot.outcome.resize(n);
  for (std::size_t r = 0; r < cfg.n_resamples; ++r) {
    Engine eng = make_engine(derive_seed(cfg.seed, Stream::bootstrap, r));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index src = pick(eng);
      boot.covariates.row(i) = sorted.covariates.row(src);
      boot.treatment[i] = sorted.treatment[src];
      boot.outcome[i] = sorted.outcome[src];
    }
    try {
      estimates.push_back(marginal_from(fit_outcome_model(boot), designs, scale).contrast);
    } catch (const Error& e) {
      if (e.error_class() != ErrorClass::numerical) throw;
      ++res.n_failed_resamples;
    }
  }
  if (static_cast<double>(res.n_failed_resamples) >
      cfg.max_failure_fraction * static_cast<double>(cfg.n_resamples)) {
    throw ResampleFailureError(std::to_string(res.n_failed_resamples) + " of " +
                               std::to_string(cfg.n_resamples) + " bootstrap resamples failed to fit");
  }

  res.n_resamples_used = estimates.size();
  res.estimate = stats::mean(estimates);
  res.std_error = stats::sample_sd(estimates);
  std::sort(estimates.begin(), estimates.end());
  res.lower = stats::quantile_type7_sorted(estimates, (1.0 - level) / 2.0);
  res.upper = stats::quantile_type7_sorted(estimates, (1.0 + level) / 2.0);
  return res;
}

}  // namespace mimstd::gcomp
