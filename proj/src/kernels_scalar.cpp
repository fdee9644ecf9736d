#include <cmath>

#include "mimstd/kernels.hpp"

namespace mimstd::kernels::scalar {

namespace {

inline double inv_logit_one(double e) noexcept {
  if (e >= 0.0) {
    return 1.0 / (1.0 + std::exp(-e));
  }
  const double z = std::exp(e);
  return z / (1.0 + z);
}

// log(1 + exp(e)) without overflow
inline double softplus(double e) noexcept {
  return std::fmax(e, 0.0) + std::log1p(std::exp(-std::fabs(e)));
}

}  // namespace

void linear_predictor(DesignView x, std::span<const double> beta, std::span<double> eta) {
  const std::size_t n = x.rows;
  for (std::size_t i = 0; i < n; ++i) eta[i] = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    const double b = beta[j];
    const double* col = x.data + j * n;
    for (std::size_t i = 0; i < n; ++i) eta[i] += col[i] * b;
  }
}

void inv_logit(std::span<const double> eta, std::span<double> out) {
  for (std::size_t i = 0; i < eta.size(); ++i) out[i] = inv_logit_one(eta[i]);
}

double sum_inv_logit(std::span<const double> eta) {
  double s = 0.0;
  for (double e : eta) s += inv_logit_one(e);
  return s;
}

double bernoulli_loglik(std::span<const double> eta, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) s += y[i] * eta[i] - softplus(eta[i]);
  return s;
}

}  // namespace mimstd::kernels::scalar
