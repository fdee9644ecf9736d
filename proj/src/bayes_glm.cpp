#include "mimstd/bayes_glm.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mimstd/errors.hpp"
#include "mimstd/kernels.hpp"

namespace mimstd::bayes {

namespace {

constexpr double kTargetAcceptance = 0.234;
constexpr double kIndependenceDof = 7.0;

class LogPosterior {
 public:
  LogPosterior(const Matrix& x, const Vector& y, const std::vector<double>& scales)
      : x_(x), y_(y), precision_(static_cast<Eigen::Index>(scales.size())), eta_(x.rows()) {
    for (std::size_t j = 0; j < scales.size(); ++j) {
      precision_[static_cast<Eigen::Index>(j)] = 1.0 / (scales[j] * scales[j]);
    }
  }

  double operator()(const Vector& beta) {
    double lp = -0.5 * (beta.array().square() * precision_.array()).sum();
    if (x_.rows() == 0) return lp;
    const auto n = static_cast<std::size_t>(x_.rows());
    kernels::linear_predictor({x_.data(), n, static_cast<std::size_t>(x_.cols())},
                              {beta.data(), static_cast<std::size_t>(beta.size())}, {eta_.data(), n});
    return lp + kernels::bernoulli_loglik({eta_.data(), n}, {y_.data(), n});
  }

  /// Newton iterations to the posterior mode; returns the mode and the
  /// inverse negative Hessian there.
  std::pair<Vector, Matrix> laplace(Vector beta) {
    const Eigen::Index p = x_.cols();
    Matrix hessian(p, p);
    for (int iter = 0; iter < 100; ++iter) {
      const auto [grad, h] = derivatives(beta);
      hessian = h;
      Eigen::LLT<Matrix> llt(hessian);
      if (llt.info() != Eigen::Success) throw SingularError("Laplace Hessian is not positive definite");
      Vector step = llt.solve(grad);
      const double current = (*this)(beta);
      double scale = 1.0;
      for (int halving = 0; halving < 30; ++halving) {
        if ((*this)(beta + scale * step) >= current - 1e-12) break;
        scale *= 0.5;
      }
      beta += scale * step;
      if ((scale * step).cwiseAbs().maxCoeff() < 1e-10) break;
    }
    hessian = derivatives(beta).second;
    Matrix cov = hessian.llt().solve(Matrix::Identity(p, p));
    cov = 0.5 * (cov + cov.transpose());
    return {beta, cov};
  }

 private:
  std::pair<Vector, Matrix> derivatives(const Vector& beta) const {
    Vector grad = -beta.cwiseProduct(precision_);
    Matrix hess = precision_.asDiagonal();
    if (x_.rows() > 0) {
      const Vector eta = x_ * beta;
      Vector mu(eta.size());
      Vector w(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        mu[i] = glm::apply_inverse_link(eta[i], glm::Link{glm::LinkKind::logit});
        w[i] = mu[i] * (1.0 - mu[i]);
      }
      grad += x_.transpose() * (y_ - mu);
      hess += x_.transpose() * w.asDiagonal() * x_;
    }
    return {grad, hess};
  }

  const Matrix& x_;
  const Vector& y_;
  Vector precision_;
  Vector eta_;
};

Vector standard_normal(Eigen::Index d, std::normal_distribution<double>& normal, Engine& eng) {
  Vector z(d);
  for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(eng);
  return z;
}

// Multivariate-t log density up to a constant, via the Cholesky factor.
double log_t_kernel(const Vector& theta, const Vector& center, const Matrix& chol_lower, double dof) {
  const Vector u = chol_lower.triangularView<Eigen::Lower>().solve(theta - center);
  return -0.5 * (dof + static_cast<double>(theta.size())) * std::log1p(u.squaredNorm() / dof);
}

}  // namespace

std::vector<double> PriorSpec::resolve(const Matrix& design) const {
  const auto p = static_cast<std::size_t>(design.cols());
  std::vector<double> out;
  if (!scales.empty()) {
    if (scales.size() != p) throw ShapeError("prior scale vector length differs from design width");
    out = scales;
  } else {
    out.assign(p, coefficient_scale);
    if (p > 0) out[0] = intercept_scale;
    if (autoscale && design.rows() > 1) {
      for (std::size_t j = 1; j < p; ++j) {
        const auto col = design.col(static_cast<Eigen::Index>(j));
        const double m = col.mean();
        const double sd = std::sqrt((col.array() - m).square().sum() / static_cast<double>(col.size() - 1));
        if (sd > 0.0) out[j] = coefficient_scale / sd;
      }
    }
  }
  for (double s : out) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("prior scales must be positive and finite");
  }
  return out;
}

void McmcConfig::validate() const {
  if (n_chains < 1) throw DomainError("need at least one chain");
  if (burn_in >= iterations) throw DomainError("burn-in must be shorter than the chain");
  if (thin < 1) throw DomainError("thin must be at least 1");
  if (!(independence_probability >= 0.0 && independence_probability <= 1.0)) {
    throw DomainError("independence_probability must lie in [0, 1]");
  }
}

PosteriorDraws sample_posterior(const Matrix& design, const Vector& outcomes, const PriorSpec& prior,
                                const McmcConfig& cfg) {
  cfg.validate();
  if (outcomes.size() != design.rows()) throw ShapeError("design and outcome lengths differ");
  const Eigen::Index p = design.cols();
  const auto d = static_cast<double>(p);

  LogPosterior log_post(design, outcomes, prior.resolve(design));

  Vector anchor = Vector::Zero(p);
  if (design.rows() > p) anchor = glm::fit_mle(design, outcomes).coefficients;
  auto [mode, laplace_cov] = log_post.laplace(anchor);
  if (design.rows() <= p) anchor = mode;
  const Matrix laplace_chol = laplace_cov.llt().matrixL();
  const Vector posterior_sd = laplace_cov.diagonal().cwiseSqrt();

  const std::size_t kept = cfg.iterations - cfg.burn_in;
  PosteriorDraws out;
  out.n_chains = cfg.n_chains;
  out.draws.resize(static_cast<Eigen::Index>(cfg.retained()), p);
  out.laplace_mode = mode;
  out.laplace_covariance = laplace_cov;
  std::size_t accepted_kept = 0;

  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    Engine eng = make_engine(derive_seed(cfg.seed, Stream::mcmc, c));
    std::normal_distribution<double> normal;
    std::chi_squared_distribution<double> chi2(kIndependenceDof);

    Vector theta = anchor + 0.1 * posterior_sd.cwiseProduct(standard_normal(p, normal, eng));
    double lp = log_post(theta);
    double lq = log_t_kernel(theta, mode, laplace_chol, kIndependenceDof);

    Matrix rw_chol = laplace_chol;
    double log_scale = std::log(2.38 / std::sqrt(d));
    std::size_t rw_steps = 0;
    // running moments of the burn-in states feeding the random-walk covariance
    Vector run_mean = Vector::Zero(p);
    Matrix run_m2 = Matrix::Zero(p, p);
    std::size_t run_n = 0;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
      const bool burning = it < cfg.burn_in;
      const bool independent = uniform01(eng) < cfg.independence_probability;
      Vector proposal;
      double log_ratio = 0.0;
      double proposal_lq = 0.0;
      if (independent) {
        const double w = chi2(eng);
        proposal = mode + laplace_chol * standard_normal(p, normal, eng) / std::sqrt(w / kIndependenceDof);
        proposal_lq = log_t_kernel(proposal, mode, laplace_chol, kIndependenceDof);
      } else {
        proposal = theta + std::exp(log_scale) * (rw_chol * standard_normal(p, normal, eng));
      }
      const double proposal_lp = log_post(proposal);
      log_ratio = proposal_lp - lp;
      if (independent) log_ratio += lq - proposal_lq;
      const bool accept = std::log(uniform01(eng)) < log_ratio;
      if (accept) {
        theta = proposal;
        lp = proposal_lp;
        lq = independent ? proposal_lq : log_t_kernel(theta, mode, laplace_chol, kIndependenceDof);
      }

      if (burning) {
        if (!independent) {
          ++rw_steps;
          const double gain = 1.0 / std::pow(static_cast<double>(rw_steps) + 1.0, 0.6);
          log_scale += gain * ((accept ? 1.0 : 0.0) - kTargetAcceptance);
        }
        if (it >= cfg.burn_in / 4) {
          ++run_n;
          const Vector delta = theta - run_mean;
          run_mean += delta / static_cast<double>(run_n);
          run_m2 += delta * (theta - run_mean).transpose();
        }
        const bool refresh = it + 1 == cfg.burn_in / 2 || it + 1 == (3 * cfg.burn_in) / 4;
        if (refresh && run_n > 10 * static_cast<std::size_t>(p)) {
          Matrix emp = run_m2 / static_cast<double>(run_n - 1);
          emp += 1e-9 * laplace_cov.diagonal().asDiagonal();
          Eigen::LLT<Matrix> llt(emp);
          if (llt.info() == Eigen::Success) rw_chol = llt.matrixL();
        }
      } else {
        if (accept) ++accepted_kept;
        out.draws.row(static_cast<Eigen::Index>(c * kept + (it - cfg.burn_in))) = theta.transpose();
      }
    }
  }

  out.acceptance_rate = static_cast<double>(accepted_kept) / static_cast<double>(cfg.retained());
  if (kept >= 4) out.diagnostics = diagnostics::summarize(out.draws, cfg.n_chains);
  if (cfg.enforce_diagnostics) {
    if (kept < 4) throw ConvergenceError("too few retained draws for diagnostics");
    if (out.diagnostics.max_rhat() > cfg.max_rhat || out.diagnostics.min_ess() < cfg.min_ess) {
      throw ConvergenceError("posterior sampler failed convergence gates: max R-hat " +
                             std::to_string(out.diagnostics.max_rhat()) + ", min ESS " +
                             std::to_string(out.diagnostics.min_ess()));
    }
  }
  return out;
}

std::vector<std::uint8_t> posterior_predictive_draw(const Vector& beta, const Matrix& design,
                                                    Engine& rng) {
  const Vector eta = glm::linear_predictor(beta, design);
  const auto n = static_cast<std::size_t>(eta.size());
  std::vector<double> prob(n);
  kernels::inv_logit({eta.data(), n}, prob);
  std::vector<std::uint8_t> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = uniform01(rng) < prob[j] ? 1 : 0;
  return y;
}

Matrix thin_draws(const PosteriorDraws& draws, std::size_t thin) {
  if (thin < 1) throw DomainError("thin must be at least 1");
  const auto rows = static_cast<Eigen::Index>(static_cast<std::size_t>(draws.draws.rows()) / thin);
  Matrix out(rows, draws.draws.cols());
  for (Eigen::Index m = 0; m < rows; ++m) {
    out.row(m) = draws.draws.row(m * static_cast<Eigen::Index>(thin));
  }
  return out;
}

}  // namespace mimstd::bayes
