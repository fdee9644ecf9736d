#include "mimstd/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mimstd/errors.hpp"
#include "mimstd/kernels.hpp"
#include "mimstd/random.hpp"

namespace mimstd::simgen {

namespace {

constexpr std::size_t kChunk = 1 << 16;

// Lower Cholesky factor of the covariance diag(sd) R diag(sd).
Matrix covariance_factor(const std::vector<double>& sds, double rho) {
  const auto k = static_cast<Eigen::Index>(sds.size());
  for (double s : sds) {
    if (!(s > 0.0)) throw DomainError("covariate standard deviations must be positive");
  }
  Matrix corr = Matrix::Constant(k, k, rho);
  corr.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("correlation matrix with rho = " + std::to_string(rho) +
                              " is not positive definite");
  }
  Vector sd(k);
  for (Eigen::Index j = 0; j < k; ++j) sd[j] = sds[static_cast<std::size_t>(j)];
  return sd.asDiagonal() * Matrix(llt.matrixL());
}

void fill_covariates(Matrix& out, const std::vector<double>& means, const Matrix& factor, Engine& eng) {
  std::normal_distribution<double> normal;
  const Eigen::Index k = out.cols();
  Vector z(k);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z[j] = normal(eng);
    const Vector x = factor * z;
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = means[static_cast<std::size_t>(j)] + x[j];
  }
}

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

DgmConfig DgmConfig::standard(std::size_t n_index) {
  DgmConfig cfg;
  cfg.n_index = n_index;
  return cfg;
}

Vector DgmConfig::coefficients() const {
  const auto k = static_cast<Eigen::Index>(n_covariates());
  Vector beta(2 * k + 2);
  beta[0] = beta0;
  for (Eigen::Index j = 0; j < k; ++j) {
    beta[1 + j] = beta1[static_cast<std::size_t>(j)];
    beta[k + 2 + j] = beta2[static_cast<std::size_t>(j)];
  }
  beta[k + 1] = beta_t;
  return beta;
}

void DgmConfig::validate() const {
  const std::size_t k = means.size();
  if (sds.size() != k || beta1.size() != k || beta2.size() != k) {
    throw DomainError("DGM covariate parameter vectors differ in length");
  }
  covariance_factor(sds, rho);
}

Matrix sample_covariates(const std::vector<double>& means, const std::vector<double>& sds, double rho,
                         std::size_t n, std::uint64_t seed) {
  if (means.size() != sds.size()) throw DomainError("means and sds differ in length");
  const Matrix factor = covariance_factor(sds, rho);
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(means.size()));
  Engine eng = make_engine(seed);
  fill_covariates(out, means, factor, eng);
  return out;
}

IndexStudyData simulate_index_trial(const DgmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  IndexStudyData data;
  data.covariates =
      sample_covariates(cfg.means, cfg.sds, cfg.rho, cfg.n_index, derive_seed(seed, Stream::index_data));

  const auto n = static_cast<Eigen::Index>(cfg.n_index);
  std::vector<double> t(cfg.n_index, 0.0);
  std::fill(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(cfg.n_index / 2), 1.0);
  Engine alloc = make_engine(derive_seed(seed, Stream::allocation));
  std::shuffle(t.begin(), t.end(), alloc);
  data.treatment = Eigen::Map<const Vector>(t.data(), n);

  const glm::DesignSpec spec{cfg.n_covariates(), true};
  const Vector eta = glm::linear_predictor(cfg.coefficients(), glm::build_design(data.covariates, data.treatment, spec));
  Vector theta(n);
  kernels::inv_logit(as_span(eta), {theta.data(), static_cast<std::size_t>(n)});
  Engine draw = make_engine(derive_seed(seed, Stream::outcomes));
  data.outcome.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) data.outcome[i] = uniform01(draw) < theta[i] ? 1.0 : 0.0;
  return data;
}

TargetShift target_distribution(const DgmConfig& cfg, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("kappa must lie in (0, 1]");
  TargetShift shift;
  shift.kappa = kappa;
  const double factor = 1.1 + (1.0 - kappa) * (1.0 - kappa);
  for (double m : cfg.means) shift.means.push_back(m * factor);
  for (double s : cfg.sds) shift.sds.push_back(0.75 * s);
  return shift;
}

TargetCovariates simulate_target(const DgmConfig& cfg, double kappa, std::uint64_t seed, std::size_t n) {
  const TargetShift shift = target_distribution(cfg, kappa);
  return TargetCovariates{sample_covariates(shift.means, shift.sds, cfg.rho, n == 0 ? cfg.n_target : n,
                                            derive_seed(seed, Stream::target_data))};
}

TrueEffect true_marginal_logor(const DgmConfig& cfg, double kappa, std::size_t cohort_size, std::uint64_t seed,
                               bool bernoulli_outcomes) {
  if (cohort_size < 100000) throw DomainError("truth cohort must have at least 1e5 subjects");
  cfg.validate();
  const TargetShift shift = target_distribution(cfg, kappa);
  const Matrix factor = covariance_factor(shift.sds, cfg.rho);
  const Vector beta = cfg.coefficients();
  const glm::DesignSpec spec{cfg.n_covariates(), true};

  Engine cov_eng = make_engine(derive_seed(seed, Stream::truth, 0));
  Engine out_eng = make_engine(derive_seed(seed, Stream::truth, 1));
  double sum1 = 0.0;
  double sum0 = 0.0;
  for (std::size_t start = 0; start < cohort_size; start += kChunk) {
    const std::size_t rows = std::min(kChunk, cohort_size - start);
    Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cfg.n_covariates()));
    fill_covariates(x, shift.means, factor, cov_eng);
    const Vector eta1 = glm::linear_predictor(beta, glm::build_design(x, 1, spec));
    const Vector eta0 = glm::linear_predictor(beta, glm::build_design(x, 0, spec));
    if (!bernoulli_outcomes) {
      sum1 += kernels::sum_inv_logit(as_span(eta1));
      sum0 += kernels::sum_inv_logit(as_span(eta0));
      continue;
    }
    std::vector<double> th1(rows);
    std::vector<double> th0(rows);
    kernels::inv_logit(as_span(eta1), th1);
    kernels::inv_logit(as_span(eta0), th0);
    for (std::size_t i = 0; i < rows; ++i) {
      sum1 += uniform01(out_eng) < th1[i] ? 1.0 : 0.0;
      sum0 += uniform01(out_eng) < th0[i] ? 1.0 : 0.0;
    }
  }
  TrueEffect truth;
  truth.p1 = sum1 / static_cast<double>(cohort_size);
  truth.p0 = sum0 / static_cast<double>(cohort_size);
  const glm::Link logit{glm::LinkKind::logit};
  truth.log_or = logit.apply(truth.p1) - logit.apply(truth.p0);
  return truth;
}

double true_conditional_at_means(const DgmConfig& cfg, double kappa) {
  const TargetShift shift = target_distribution(cfg, kappa);
  double v = cfg.beta_t;
  for (std::size_t k = 0; k < shift.means.size(); ++k) v += cfg.beta2[k] * shift.means[k];
  return v;
}

}  // namespace mimstd::simgen
