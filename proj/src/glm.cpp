#include "mimstd/glm.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "mimstd/errors.hpp"
#include "mimstd/kernels.hpp"

namespace mimstd::glm {

namespace {

constexpr double kSeparationCoefficient = 1e3;
constexpr double kSeparationProbability = 1e-10;
constexpr double kRankTolerance = 1e-12;

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_binary(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) {
      throw DomainError(std::string(what) + " entry " + std::to_string(i) + " is not 0/1");
    }
  }
}

double bernoulli_loglik(const Vector& y, const Vector& mu) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += y[i] > 0.5 ? std::log(mu[i]) : std::log1p(-mu[i]);
  }
  return ll;
}

}  // namespace

bool Link::valid_mean(double mu) const noexcept {
  switch (kind_) {
    case LinkKind::identity:
      return std::isfinite(mu);
    case LinkKind::log:
      return mu > 0.0 && std::isfinite(mu);
    case LinkKind::logit:
      return mu > 0.0 && mu < 1.0;
  }
  return false;
}

double Link::apply(double mu) const {
  if (!valid_mean(mu)) throw DomainError("mean " + std::to_string(mu) + " outside the link domain");
  switch (kind_) {
    case LinkKind::identity:
      return mu;
    case LinkKind::log:
      return std::log(mu);
    case LinkKind::logit:
      return std::log(mu) - std::log1p(-mu);
  }
  return mu;
}

double Link::inverse(double eta) const noexcept {
  switch (kind_) {
    case LinkKind::identity:
      return eta;
    case LinkKind::log:
      return std::exp(eta);
    case LinkKind::logit:
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      {
        const double z = std::exp(eta);
        return z / (1.0 + z);
      }
  }
  return eta;
}

double Link::mean_derivative(double eta) const noexcept {
  switch (kind_) {
    case LinkKind::identity:
      return 1.0;
    case LinkKind::log:
      return std::exp(eta);
    case LinkKind::logit: {
      const double mu = inverse(eta);
      return mu * (1.0 - mu);
    }
  }
  return 1.0;
}

double apply_link(double mu, Link link) { return link.apply(mu); }
double apply_inverse_link(double eta, Link link) { return link.inverse(eta); }

Matrix build_design(const Matrix& covariates, const Vector& treatment, const DesignSpec& spec) {
  const Eigen::Index n = covariates.rows();
  const auto k = static_cast<Eigen::Index>(spec.n_covariates);
  if (treatment.size() != n) {
    throw ShapeError("covariates have " + std::to_string(n) + " rows but treatment has " +
                     std::to_string(treatment.size()));
  }
  if (covariates.cols() != k) {
    throw ShapeError("expected " + std::to_string(k) + " covariate columns, got " +
                     std::to_string(covariates.cols()));
  }
  check_binary(treatment, "treatment");

  Matrix x(n, static_cast<Eigen::Index>(spec.width()));
  x.col(0).setOnes();
  x.middleCols(1, k) = covariates;
  x.col(k + 1) = treatment;
  if (spec.include_interactions) {
    x.middleCols(k + 2, k) = covariates.array().colwise() * treatment.array();
  }
  return x;
}

Matrix build_design(const Matrix& covariates, int treatment, const DesignSpec& spec) {
  return build_design(covariates, Vector::Constant(covariates.rows(), treatment), spec);
}

Vector linear_predictor(const Vector& coefficients, const Matrix& design) {
  if (coefficients.size() != design.cols()) {
    throw ShapeError("design width " + std::to_string(design.cols()) + " != coefficient length " +
                     std::to_string(coefficients.size()));
  }
  Vector eta(design.rows());
  kernels::linear_predictor(
      {design.data(), static_cast<std::size_t>(design.rows()), static_cast<std::size_t>(design.cols())},
      as_span(coefficients), {eta.data(), static_cast<std::size_t>(eta.size())});
  return eta;
}

FittedGlm fit_mle(const Matrix& design, const Vector& outcomes, Link link, const FitOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (outcomes.size() != n) {
    throw ShapeError("design has " + std::to_string(n) + " rows but outcomes has " +
                     std::to_string(outcomes.size()));
  }
  if (n <= p) throw ShapeError("fit needs more rows than coefficients");
  check_binary(outcomes, "outcome");

  Vector eta(n);
  Vector mu(n);
  Vector beta = Vector::Zero(p);
  if (options.start) {
    if (options.start->size() != p) throw ShapeError("start vector has the wrong length");
    beta = *options.start;
    eta = linear_predictor(beta, design);
    for (Eigen::Index i = 0; i < n; ++i) mu[i] = link.inverse(eta[i]);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = (outcomes[i] + 0.5) / 2.0;
      eta[i] = link.apply(mu[i]);
    }
  }

  auto check_means = [&](const Vector& m) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(m[i] > 0.0 && m[i] < 1.0)) {
        throw DomainError("fitted mean outside (0, 1) on row " + std::to_string(i));
      }
    }
  };
  check_means(mu);

  double deviance = -2.0 * bernoulli_loglik(outcomes, mu);
  FittedGlm fit;
  fit.link = link;

  Vector w(n);
  Vector z(n);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = link.mean_derivative(eta[i]);
      const double var = mu[i] * (1.0 - mu[i]);
      w[i] = d * d / var;
      if (!(w[i] > std::numeric_limits<double>::min())) {
        throw SeparationError("IRLS weights underflowed; the outcome is separated");
      }
      z[i] = eta[i] + (outcomes[i] - mu[i]) / d;
    }
    const Vector sw = w.cwiseSqrt();
    Eigen::ColPivHouseholderQR<Matrix> qr(sw.asDiagonal() * design);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < p) throw SingularError("weighted normal equations are rank deficient");
    beta = qr.solve(sw.cwiseProduct(z));

    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(beta[j]) || std::fabs(beta[j]) > kSeparationCoefficient) {
        throw SeparationError("coefficient " + std::to_string(j) +
                              " diverged; the outcome is (quasi-)separated");
      }
    }
    eta = linear_predictor(beta, design);
    for (Eigen::Index i = 0; i < n; ++i) mu[i] = link.inverse(eta[i]);
    check_means(mu);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mu[i] < kSeparationProbability || mu[i] > 1.0 - kSeparationProbability) {
        throw SeparationError("fitted probability within 1e-10 of 0 or 1 on row " +
                              std::to_string(i) + "; the outcome is (quasi-)separated");
      }
    }

    const double next = -2.0 * bernoulli_loglik(outcomes, mu);
    fit.iterations = iter;
    const bool done = std::fabs(next - deviance) / (std::fabs(next) + 0.1) < options.tolerance;
    deviance = next;
    if (done) {
      fit.converged = true;
      break;
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = link.mean_derivative(eta[i]);
    w[i] = d * d / (mu[i] * (1.0 - mu[i]));
  }
  const Matrix info = design.transpose() * w.asDiagonal() * design;
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw SingularError("information matrix is not positive definite");
  }
  fit.coefficients = beta;
  fit.covariance = ldlt.solve(Matrix::Identity(p, p));
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
  fit.log_likelihood = -0.5 * deviance;
  return fit;
}

FittedGlm fit_mle(const Matrix& covariates, const Vector& treatment, const Vector& outcomes,
                  const DesignSpec& spec, Link link, const FitOptions& options) {
  FittedGlm fit = fit_mle(build_design(covariates, treatment, spec), outcomes, link, options);
  fit.spec = spec;
  return fit;
}

Vector predict_mean(const FittedGlm& model, const Matrix& design) {
  const Vector eta = linear_predictor(model.coefficients, design);
  Vector mu(eta.size());
  if (model.link.kind() == LinkKind::logit) {
    kernels::inv_logit(as_span(eta), {mu.data(), static_cast<std::size_t>(mu.size())});
  } else {
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = model.link.inverse(eta[i]);
  }
  return mu;
}

}  // namespace mimstd::glm
