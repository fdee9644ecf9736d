#include <doctest.h>

#include <cmath>
#include <vector>

#include "mimstd/errors.hpp"
#include "mimstd/harness.hpp"

using namespace mimstd;
using harness::Method;

namespace {

harness::ScenarioSpec small_spec() {
  harness::ScenarioSpec s;
  s.n_index = 300;
  s.dgm = simgen::DgmConfig::standard(300);
  s.kappa = 1.0;
  s.n_replicates = 4;
  s.bootstrap.n_resamples = 100;
  s.truth_cohort = 100'000;
  return s;
}

harness::ReplicateRecord record(std::size_t r, Method m, double est, bool ok = true) {
  harness::ReplicateRecord rec;
  rec.scenario = "N300_k1";
  rec.replicate = r;
  rec.method = m;
  rec.estimate = est;
  rec.variance = 0.01;
  rec.lower = est - 0.2;
  rec.upper = est + 0.2;
  rec.covered = std::fabs(est - -0.8) < 0.2;
  if (!ok) rec.failure = "ConvergenceError: test";
  return rec;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(harness::method_name(Method::mim) == "mim");
  CHECK(harness::method_name(Method::gcomp) == "gcomp");
  CHECK(harness::parse_method("gcomp") == Method::gcomp);
  CHECK_THROWS_AS(harness::parse_method("maic"), DomainError);
}

TEST_CASE("scenario ids and validation") {
  auto s = small_spec();
  CHECK(s.id() == "N300_k1");
  s.kappa = 0.5;
  s.n_index = 500;
  CHECK(s.id() == "N500_k0.5");
  CHECK_NOTHROW(s.validate());
  s.n_replicates = 1;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = small_spec();
  s.methods.clear();
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = small_spec();
  s.kappa = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("coverage Monte Carlo standard errors") {
  const std::size_t s = 1000;
  std::vector<double> est(s, 0.0);
  std::vector<double> var(s, 1.0);
  std::vector<double> lo(s);
  std::vector<double> hi(s);
  for (const auto& [p, expected] : {std::pair{0.95, 0.0069}, std::pair{0.5, 0.0158}}) {
    const auto covered = static_cast<std::size_t>(p * s);
    for (std::size_t i = 0; i < s; ++i) {
      lo[i] = i < covered ? -1.0 : 1.0;
      hi[i] = i < covered ? 1.0 : 2.0;
    }
    const auto m = harness::compute_metrics(est, var, lo, hi, 0.0);
    CHECK(m.coverage.value == doctest::Approx(p));
    CHECK(std::fabs(m.coverage.mcse - expected) < 5e-5);
  }
}

TEST_CASE("metrics on exact estimates") {
  const std::vector<double> est(10, -0.8);
  const std::vector<double> var(10, 0.04);
  const std::vector<double> lo(10, -1.0);
  const std::vector<double> hi(10, -0.6);
  const auto m = harness::compute_metrics(est, var, lo, hi, -0.8);
  CHECK(std::fabs(m.bias.value) < 1e-15);
  CHECK(std::fabs(m.bias.mcse) < 1e-15);
  CHECK(std::fabs(m.ese.value) < 1e-15);
  CHECK(std::fabs(m.ese.mcse) < 1e-15);
  CHECK(std::fabs(m.mse.value) < 1e-15);
  CHECK(std::fabs(m.mse.mcse) < 1e-15);
  CHECK(m.coverage.value == 1.0);
  CHECK(m.coverage.mcse == 0.0);
  CHECK(m.mean_model_se == doctest::Approx(0.2));
  CHECK(m.n_success == 10);

  // two identical replicates: ESE 0, bias equals the single error
  const std::vector<double> two(2, -0.7);
  const auto d = harness::compute_metrics(two, std::vector<double>(2, 0.01), std::vector<double>(2, -0.9),
                                          std::vector<double>(2, -0.5), -0.8);
  CHECK(std::fabs(d.ese.value) < 1e-15);
  CHECK(d.bias.value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("metric formulas") {
  const std::vector<double> est{0.1, -0.2, 0.4, 0.0, 0.3};
  const std::vector<double> var(5, 0.04);
  const std::vector<double> lo{-0.3, -0.6, 0.1, -0.4, -0.1};
  const std::vector<double> hi{0.5, 0.2, 0.8, 0.4, 0.7};
  const double truth = 0.05;
  const auto m = harness::compute_metrics(est, var, lo, hi, truth);
  const double mean = 0.12;
  double ss = 0.0;
  double mse = 0.0;
  for (double e : est) {
    ss += (e - mean) * (e - mean);
    mse += (e - truth) * (e - truth);
  }
  const double ese = std::sqrt(ss / 4);
  mse /= 5;
  double mse_ss = 0.0;
  for (double e : est) mse_ss += std::pow((e - truth) * (e - truth) - mse, 2);
  CHECK(m.bias.value == doctest::Approx(mean - truth).epsilon(1e-12));
  CHECK(m.bias.mcse == doctest::Approx(ese / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(m.ese.value == doctest::Approx(ese).epsilon(1e-12));
  CHECK(m.ese.mcse == doctest::Approx(ese / std::sqrt(8.0)).epsilon(1e-12));
  CHECK(m.mse.value == doctest::Approx(mse).epsilon(1e-12));
  CHECK(m.mse.mcse == doctest::Approx(std::sqrt(mse_ss / 20)).epsilon(1e-12));
  CHECK(m.coverage.value == doctest::Approx(0.8));

  CHECK_THROWS_AS(harness::compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0},
                                           std::vector<double>{0.0}, std::vector<double>{2.0}, 1.0),
                  EmptyInput);
  CHECK_THROWS_AS(harness::compute_metrics(est, std::vector<double>(4, 0.1), lo, hi, truth), ShapeError);
}

TEST_CASE("coverage significance bounds") {
  const auto [lo, hi] = harness::coverage_bounds(0.95, 1000);
  CHECK(std::fabs(lo - 0.9365) < 5e-5);
  CHECK(std::fabs(hi - 0.9635) < 5e-5);
  const auto [lo5, hi5] = harness::coverage_bounds(0.5, 1000);
  CHECK(std::fabs(lo5 - 0.469) < 5e-4);
  CHECK(std::fabs(hi5 - 0.531) < 5e-4);
  const auto [lo8, hi8] = harness::coverage_bounds(0.95, 100'000'000);
  CHECK(std::fabs(lo8 - 0.95) < 1e-4);
  CHECK(std::fabs(hi8 - 0.95) < 1e-4);
}

TEST_CASE("replicate seeds") {
  const auto s = small_spec();
  CHECK(harness::replicate_seed(s, 0) == harness::replicate_seed(s, 0));
  CHECK(harness::replicate_seed(s, 0) != harness::replicate_seed(s, 1));
  auto other = s;
  other.kappa = 0.5;
  CHECK(harness::replicate_seed(s, 0) != harness::replicate_seed(other, 0));
}

TEST_CASE("scenario results do not depend on the worker count") {
  auto s = small_spec();
  const simgen::TrueEffect truth{0.5, 0.69, -0.81};
  s.workers = 1;
  const auto serial = harness::run_scenario(s, truth);
  s.workers = 3;
  std::size_t last = 0;
  const auto parallel = harness::run_scenario(s, truth, [&](std::size_t done, std::size_t total) {
    CHECK(total == 4);
    last = done;
  });
  CHECK(last == 4);
  REQUIRE(serial.records.size() == 8);
  REQUIRE(parallel.records.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(serial.records[i].replicate == i / 2);
    CHECK(serial.records[i].method == (i % 2 == 0 ? Method::mim : Method::gcomp));
    CHECK(serial.records[i].estimate == parallel.records[i].estimate);
    CHECK(serial.records[i].variance == parallel.records[i].variance);
    CHECK(serial.records[i].lower == parallel.records[i].lower);
    CHECK(serial.records[i].upper == parallel.records[i].upper);
  }
  REQUIRE(serial.summaries.size() == 2);
  CHECK(serial.summaries[0].bias.value == parallel.summaries[0].bias.value);
  CHECK(serial.summaries[1].coverage.value == parallel.summaries[1].coverage.value);
  CHECK(serial.summaries[0].truth == -0.81);

  const auto one = harness::run_replicate(s, 2, truth.log_or);
  REQUIRE(one.size() == 2);
  CHECK(one[0].estimate == serial.records[4].estimate);
  CHECK(one[1].estimate == serial.records[5].estimate);
}

TEST_CASE("methods share the simulated data of a replicate") {
  // Both estimates track the same sample, so they are far closer to each
  // other than two independent replicates are.
  auto s = small_spec();
  s.n_replicates = 6;
  const auto r = harness::run_scenario(s, simgen::TrueEffect{0.5, 0.69, -0.81});
  double within = 0.0;
  double between = 0.0;
  for (std::size_t i = 0; i + 1 < s.n_replicates; ++i) {
    within += std::fabs(r.records[2 * i].estimate - r.records[2 * i + 1].estimate);
    between += std::fabs(r.records[2 * i].estimate - r.records[2 * i + 2].estimate);
  }
  CHECK(within < 0.5 * between);
}

TEST_CASE("failure accounting") {
  auto s = small_spec();
  s.n_replicates = 10;
  s.max_failure_fraction = 0.1;
  const simgen::TrueEffect truth{0.5, 0.69, -0.8};
  std::vector<harness::ReplicateRecord> recs;
  for (std::size_t r = 0; r < 10; ++r) {
    recs.push_back(record(r, Method::mim, -0.8 + 0.01 * static_cast<double>(r), r != 3));
    recs.push_back(record(r, Method::gcomp, -0.8, true));
  }
  const auto ok = harness::summarize_records(s, truth, recs);
  REQUIRE(ok.summaries.size() == 2);
  CHECK(ok.summaries[0].n_failed == 1);
  CHECK(ok.summaries[0].n_success == 9);
  CHECK(ok.summaries[1].n_failed == 0);
  CHECK(std::fabs(ok.summaries[1].bias.value) < 1e-15);

  recs[2].failure = "SeparationError: test";
  recs[4].failure = "SeparationError: test";
  CHECK_THROWS_AS(harness::summarize_records(s, truth, recs), TooManyFailures);
}
