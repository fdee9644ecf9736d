#pragma once

// Data-parallel inner loops shared by the estimators: linear predictors,
// inverse-logit transforms and Bernoulli log-likelihoods. Each kernel has a
// scalar reference implementation and, on x86-64, an AVX2/FMA variant. The
// variant is picked once at startup from CPUID; MIMSTD_SIMD=scalar forces
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace mimstd::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa() noexcept;

/// ISA currently used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Overrides dispatch (tests, reproducibility runs). Requests for an ISA the
/// CPU lacks fall back to scalar.
void set_active_isa(Isa isa) noexcept;

/// Column-major design view: `rows` x `cols`, column j starts at data + j*rows.
struct DesignView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
};

// eta[i] = sum_j X(i, j) * beta[j]
void linear_predictor(DesignView x, std::span<const double> beta, std::span<double> eta);

// out[i] = 1 / (1 + exp(-eta[i]))
void inv_logit(std::span<const double> eta, std::span<double> out);

// sum_i inv_logit(eta[i])
double sum_inv_logit(std::span<const double> eta);

// sum_i y[i] * eta[i] - log(1 + exp(eta[i])), y[i] in {0, 1}
double bernoulli_loglik(std::span<const double> eta, std::span<const double> y);

namespace scalar {
void linear_predictor(DesignView x, std::span<const double> beta, std::span<double> eta);
void inv_logit(std::span<const double> eta, std::span<double> out);
double sum_inv_logit(std::span<const double> eta);
double bernoulli_loglik(std::span<const double> eta, std::span<const double> y);
}  // namespace scalar

#if defined(MIMSTD_HAVE_AVX2)
namespace avx2 {
void linear_predictor(DesignView x, std::span<const double> beta, std::span<double> eta);
void inv_logit(std::span<const double> eta, std::span<double> out);
double sum_inv_logit(std::span<const double> eta);
double bernoulli_loglik(std::span<const double> eta, std::span<const double> y);
}  // namespace avx2
#endif

}  // namespace mimstd::kernels
