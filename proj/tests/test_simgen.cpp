#include <doctest.h>

#include <cmath>

#include "mimstd/errors.hpp"
#include "mimstd/simgen.hpp"

using namespace mimstd;
using simgen::DgmConfig;

namespace {

double column_mean(const Matrix& x, Eigen::Index j) { return x.col(j).mean(); }

double correlation(const Matrix& x) {
  const Vector a = x.col(0).array() - x.col(0).mean();
  const Vector b = x.col(1).array() - x.col(1).mean();
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

// The index-trial covariate distribution expressed as a kappa = 1 target.
DgmConfig as_index_population(DgmConfig cfg) {
  for (auto& m : cfg.means) m /= 1.1;
  for (auto& s : cfg.sds) s /= 0.75;
  return cfg;
}

}  // namespace

TEST_CASE("default mechanism") {
  const auto cfg = DgmConfig::standard(1000);
  CHECK(cfg.n_index == 1000);
  CHECK(cfg.n_target == 2000);
  CHECK(cfg.n_covariates() == 2);
  const Vector b = cfg.coefficients();
  REQUIRE(b.size() == 6);
  CHECK(b[0] == -0.5);
  CHECK(b[1] == 1.0);
  CHECK(b[2] == 0.4);
  CHECK(b[3] == -1.5);
  CHECK(b[4] == 0.5);
  CHECK(b[5] == 0.2);
  // beta1 = 2 sd, beta2 = sd
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(cfg.beta1[k] == doctest::Approx(2.0 * cfg.sds[k]));
    CHECK(cfg.beta2[k] == doctest::Approx(cfg.sds[k]));
  }
  // x = (1.0, 0.5) treated
  const double eta = b[0] + b[1] * 1.0 + b[2] * 0.5 + b[3] + b[4] * 1.0 + b[5] * 0.5;
  CHECK(eta == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(1.0 / (1.0 + std::exp(-eta)) == doctest::Approx(0.450166002687522).epsilon(1e-13));
}

TEST_CASE("config validation") {
  auto cfg = DgmConfig::standard(100);
  cfg.rho = -0.99;
  cfg.means = {0.0, 0.0, 0.0};
  cfg.sds = {1.0, 1.0, 1.0};
  cfg.beta1 = {0.0, 0.0, 0.0};
  cfg.beta2 = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), NotPositiveDefinite);
  CHECK_THROWS_AS(simgen::sample_covariates(cfg.means, cfg.sds, cfg.rho, 10, 1), NotPositiveDefinite);
  CHECK_THROWS_AS(simgen::sample_covariates({0.0, 0.0}, {1.0, 1.0}, 1.0, 10, 1), NotPositiveDefinite);
  CHECK_THROWS_AS(simgen::sample_covariates({0.0, 0.0}, {1.0, 0.0}, 0.1, 10, 1), DomainError);
  CHECK_THROWS_AS(simgen::sample_covariates({0.0, 0.0}, {1.0}, 0.1, 10, 1), DomainError);
  auto bad = DgmConfig::standard(100);
  bad.beta2 = {0.5};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_NOTHROW(DgmConfig::standard(100).validate());
}

TEST_CASE("covariate sampling moments") {
  const Matrix x0 = simgen::sample_covariates({1.0, 0.5}, {0.5, 0.2}, 0.0, 1'000'000, 11);
  CHECK(std::fabs(column_mean(x0, 0) - 1.0) < 0.002);
  CHECK(std::fabs(column_mean(x0, 1) - 0.5) < 0.002);
  CHECK(std::fabs(correlation(x0)) < 0.003);

  const Matrix x = simgen::sample_covariates({1.0, 0.5}, {0.5, 0.2}, 0.15, 1'000'000, 12);
  CHECK(std::fabs(correlation(x) - 0.15) < 0.003);
  const Vector c = x.col(1).array() - column_mean(x, 1);
  CHECK(std::sqrt(c.squaredNorm() / (x.rows() - 1)) == doctest::Approx(0.2).epsilon(0.005));

  const Matrix one = simgen::sample_covariates({1.0, 0.5}, {0.5, 0.2}, 0.15, 1, 3);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 2);
  CHECK(simgen::sample_covariates({1.0, 0.5}, {0.5, 0.2}, 0.15, 50, 3) ==
        simgen::sample_covariates({1.0, 0.5}, {0.5, 0.2}, 0.15, 50, 3));
}

TEST_CASE("index trial allocation and determinism") {
  const auto cfg = DgmConfig::standard(501);
  const auto d = simgen::simulate_index_trial(cfg, 9);
  CHECK(d.size() == 501);
  CHECK(d.treatment.sum() == 250.0);
  CHECK_NOTHROW(d.validate());
  // shuffled: treated rows are not a contiguous block
  CHECK(d.treatment.head(250).sum() < 250.0);

  const auto again = simgen::simulate_index_trial(cfg, 9);
  CHECK(again.covariates == d.covariates);
  CHECK(again.treatment == d.treatment);
  CHECK(again.outcome == d.outcome);
  const auto other = simgen::simulate_index_trial(cfg, 10);
  CHECK(other.outcome != d.outcome);
}

TEST_CASE("control-arm event rate matches an independent oracle") {
  const auto cfg = DgmConfig::standard(1'000'000);
  const auto d = simgen::simulate_index_trial(cfg, 21);
  double events = 0.0;
  double controls = 0.0;
  for (Eigen::Index i = 0; i < d.treatment.size(); ++i) {
    if (d.treatment[i] == 0.0) {
      controls += 1.0;
      events += d.outcome[i];
    }
  }
  const auto oracle = simgen::true_marginal_logor(as_index_population(cfg), 1.0, 2'000'000, 99);
  CHECK(std::fabs(events / controls - oracle.p0) < 0.002);
}

TEST_CASE("null mechanism has a half event rate") {
  auto cfg = DgmConfig::standard(200'000);
  cfg.beta0 = 0.0;
  cfg.beta_t = 0.0;
  cfg.beta1 = {0.0, 0.0};
  cfg.beta2 = {0.0, 0.0};
  const auto d = simgen::simulate_index_trial(cfg, 5);
  CHECK(std::fabs(d.outcome.mean() - 0.5) < 4.0 * 0.5 / std::sqrt(200'000.0));
}

TEST_CASE("target distribution") {
  const auto cfg = DgmConfig::standard(500);
  const auto k1 = simgen::target_distribution(cfg, 1.0);
  CHECK(k1.means[0] == doctest::Approx(1.1));
  CHECK(k1.means[1] == doctest::Approx(0.55));
  CHECK(k1.sds[0] == doctest::Approx(0.375));
  CHECK(k1.sds[1] == doctest::Approx(0.15));
  const auto k05 = simgen::target_distribution(cfg, 0.5);
  CHECK(k05.means[0] == doctest::Approx(1.35));
  CHECK(k05.means[1] == doctest::Approx(0.675));
  CHECK(k05.sds[0] == doctest::Approx(0.375));
  auto zero = cfg;
  zero.means = {0.0, 0.0};
  CHECK(simgen::target_distribution(zero, 1.0).means == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(simgen::target_distribution(cfg, 0.0), DomainError);
  CHECK_THROWS_AS(simgen::target_distribution(cfg, -0.5), DomainError);
  CHECK_THROWS_AS(simgen::target_distribution(cfg, 1.5), DomainError);
}

TEST_CASE("target samples") {
  const auto cfg = DgmConfig::standard(500);
  const auto t = simgen::simulate_target(cfg, 1.0, 4);
  CHECK(t.covariates.rows() == 2000);
  CHECK(t.covariates.cols() == 2);
  CHECK(simgen::simulate_target(cfg, 1.0, 4).covariates == t.covariates);
  const auto big = simgen::simulate_target(cfg, 1.0, 4, 1'000'000);
  CHECK(std::fabs(column_mean(big.covariates, 0) - 1.1) < 0.002);
  CHECK(std::fabs(column_mean(big.covariates, 1) - 0.55) < 0.002);
  CHECK(std::fabs(correlation(big.covariates) - 0.15) < 0.003);
}

TEST_CASE("true marginal log odds ratio") {
  const auto cfg = DgmConfig::standard(500);
  const auto half = simgen::true_marginal_logor(cfg, 0.5);
  CHECK(std::fabs(half.p1 - 0.60) < 0.01);
  CHECK(std::fabs(half.p0 - 0.75) < 0.01);
  CHECK(std::fabs(half.log_or - -0.68) <= 0.01);
  CHECK(half.log_or == doctest::Approx(std::log(half.p1 / (1 - half.p1)) - std::log(half.p0 / (1 - half.p0))));

  const auto full = simgen::true_marginal_logor(cfg, 1.0);
  CHECK(std::fabs(full.p1 - 0.50) < 0.01);
  CHECK(std::fabs(full.p0 - 0.69) < 0.01);
  CHECK(std::fabs(full.log_or - -0.81) <= 0.01);
  CHECK(full.log_or < half.log_or);

  const auto bern = simgen::true_marginal_logor(cfg, 1.0, simgen::kDefaultCohort, 1, true);
  CHECK(std::fabs(bern.log_or - full.log_or) < 0.005);

  auto null = cfg;
  null.beta_t = 0.0;
  null.beta2 = {0.0, 0.0};
  CHECK(simgen::true_marginal_logor(null, 0.5, 100'000).log_or == 0.0);

  CHECK_THROWS_AS(simgen::true_marginal_logor(cfg, 1.0, 99'999), DomainError);
  CHECK(simgen::true_marginal_logor(cfg, 1.0, 100'000, 7).log_or ==
        simgen::true_marginal_logor(cfg, 1.0, 100'000, 7).log_or);
}

TEST_CASE("conditional log odds ratio at the target means") {
  const auto cfg = DgmConfig::standard(500);
  const double half = simgen::true_conditional_at_means(cfg, 0.5);
  const double full = simgen::true_conditional_at_means(cfg, 1.0);
  CHECK(half == doctest::Approx(-1.5 + 0.5 * 1.35 + 0.2 * 0.675).epsilon(1e-14));
  CHECK(full == doctest::Approx(-1.5 + 0.5 * 1.1 + 0.2 * 0.55).epsilon(1e-14));
  CHECK(std::round(half * 100) / 100 == doctest::Approx(-0.69));
  CHECK(std::round(full * 100) / 100 == doctest::Approx(-0.84));

  // non-collapsibility gap, same ordering in both scenarios
  CHECK(simgen::true_marginal_logor(cfg, 0.5).log_or > half);
  CHECK(simgen::true_marginal_logor(cfg, 1.0).log_or > full);

  auto flat = cfg;
  flat.beta2 = {0.0, 0.0};
  CHECK(simgen::true_conditional_at_means(flat, 0.5) == -1.5);
}
