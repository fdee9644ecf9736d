#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "mimstd/errors.hpp"
#include "mimstd/random.hpp"
#include "mimstd/stats.hpp"

using namespace mimstd;

TEST_CASE("seed derivation is a pure function of its key path") {
  CHECK(derive_seed(42, {1, 2, 3}) == derive_seed(42, {1, 2, 3}));
  CHECK(derive_seed(42, {1, 2, 3}) != derive_seed(42, {1, 3, 2}));
  CHECK(derive_seed(42, {1, 2}) != derive_seed(42, {1, 2, 0}));
  CHECK(derive_seed(42, Stream::mcmc) != derive_seed(42, Stream::bootstrap));
  CHECK(derive_seed(42, Stream::synthesis, 7) == derive_seed(42, {4, 7}));

  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(derive_seed(1, Stream::bootstrap, r));
  CHECK(seen.size() == 10000);
}

TEST_CASE("uniform01 lies in [0, 1) and has the right mean") {
  Engine eng = make_engine(9);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(eng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("moments") {
  const std::vector<double> x{-0.7, -0.8, -0.9};
  CHECK(stats::mean(x) == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(stats::sample_variance(x) == doctest::Approx(0.01).epsilon(1e-13));
  CHECK(stats::sample_sd(x) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(stats::sample_variance(std::vector<double>{3.0}) == 0.0);
  CHECK_THROWS_AS(stats::mean(std::vector<double>{}), EmptyInput);
}

TEST_CASE("type-7 quantiles interpolate between order statistics") {
  std::vector<double> x{10, 1, 9, 2, 8, 3, 7, 4, 6, 5};
  CHECK(stats::quantile_type7(x, 0.0) == 1.0);
  CHECK(stats::quantile_type7(x, 1.0) == 10.0);
  CHECK(stats::quantile_type7(x, 0.25) == doctest::Approx(3.25));
  CHECK(stats::quantile_type7(x, 0.5) == doctest::Approx(5.5));
  // 1000 values 0..999: the 0.025 quantile sits at h = 24.975
  std::vector<double> y(1000);
  for (int i = 0; i < 1000; ++i) y[i] = i;
  CHECK(stats::quantile_type7(y, 0.025) == doctest::Approx(24.975).epsilon(1e-14));
  CHECK(stats::quantile_type7(y, 0.975) == doctest::Approx(974.025).epsilon(1e-14));
  CHECK_THROWS_AS(stats::quantile_type7(y, 1.5), DomainError);
}

TEST_CASE("distribution quantiles") {
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(stats::t_quantile(0.975, 3.78125) == doctest::Approx(2.8409525698782963).epsilon(1e-12));
  CHECK(stats::t_quantile(0.975, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(stats::t_quantile(0.5, 4.0) == doctest::Approx(0.0).scale(1.0));
}
