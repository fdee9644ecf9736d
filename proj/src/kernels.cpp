#include <atomic>
#include <cstdlib>
#include <string_view>

#include "mimstd/kernels.hpp"

namespace mimstd::kernels {

namespace {

Isa initial_isa() noexcept {
  const char* env = std::getenv("MIMSTD_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

Isa detected_isa() noexcept {
#if defined(MIMSTD_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  active().store(isa, std::memory_order_relaxed);
}

void linear_predictor(DesignView x, std::span<const double> beta, std::span<double> eta) {
#if defined(MIMSTD_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::linear_predictor(x, beta, eta);
#endif
  scalar::linear_predictor(x, beta, eta);
}

void inv_logit(std::span<const double> eta, std::span<double> out) {
#if defined(MIMSTD_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::inv_logit(eta, out);
#endif
  scalar::inv_logit(eta, out);
}

double sum_inv_logit(std::span<const double> eta) {
#if defined(MIMSTD_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::sum_inv_logit(eta);
#endif
  return scalar::sum_inv_logit(eta);
}

double bernoulli_loglik(std::span<const double> eta, std::span<const double> y) {
#if defined(MIMSTD_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::bernoulli_loglik(eta, y);
#endif
  return scalar::bernoulli_loglik(eta, y);
}

}  // namespace mimstd::kernels
