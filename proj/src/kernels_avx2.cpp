#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "mimstd/kernels.hpp"

#define MIMSTD_AVX2 __attribute__((target("avx2,fma")))

namespace mimstd::kernels::avx2 {

namespace {

// Cephes-style exp, valid for x <= 0. Arguments below -708 are clamped, which
// keeps 2^n a normal number; exp(-708) is far below anything the callers add
// to 1.0.
MIMSTD_AVX2 inline __m256d exp_nonpositive(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  x = _mm256_max_pd(x, lo);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // 2^n assembled from the exponent bits; n is in [-1022, 0].
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

// log(1 + x) on the reduced range [sqrt(1/2) - 1, sqrt(2) - 1] (Cephes rational form).
MIMSTD_AVX2 inline __m256d log1p_reduced(__m256d x) {
  __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(7.70838733755885391666E0));
  __m256d q = _mm256_add_pd(x, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(2.31251620126765340583E1));
  const __m256d z = _mm256_mul_pd(x, x);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(x, z), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), y);
  return _mm256_add_pd(x, y);
}

// log(1 + u) for u in [0, 1]
MIMSTD_AVX2 inline __m256d log1p_unit(__m256d u) {
  // Above sqrt(2) - 1 use log(1 + u) = log 2 + log(1 + (u - 1) / 2).
  const __m256d hi = _mm256_cmp_pd(u, _mm256_set1_pd(0.41421356237309504880), _CMP_GT_OQ);
  const __m256d halved = _mm256_mul_pd(_mm256_sub_pd(u, _mm256_set1_pd(1.0)), _mm256_set1_pd(0.5));
  const __m256d x = _mm256_blendv_pd(u, halved, hi);
  __m256d y = log1p_reduced(x);
  // log 2 split in two parts, added low part first
  const __m256d e = _mm256_and_pd(hi, _mm256_set1_pd(1.0));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), y);
}

MIMSTD_AVX2 inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

MIMSTD_AVX2 inline __m256d inv_logit_pd(__m256d eta) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d z = exp_nonpositive(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(eta)));
  const __m256d denom = _mm256_add_pd(one, z);
  const __m256d pos = _mm256_div_pd(one, denom);
  const __m256d neg = _mm256_div_pd(z, denom);
  const __m256d is_neg = _mm256_cmp_pd(eta, _mm256_setzero_pd(), _CMP_LT_OQ);
  return _mm256_blendv_pd(pos, neg, is_neg);
}

MIMSTD_AVX2 inline __m256d softplus_pd(__m256d eta) {
  const __m256d z = exp_nonpositive(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(eta)));
  return _mm256_add_pd(_mm256_max_pd(eta, _mm256_setzero_pd()), log1p_unit(z));
}

MIMSTD_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double inv_logit_tail(double e) {
  if (e >= 0.0) return 1.0 / (1.0 + std::exp(-e));
  const double z = std::exp(e);
  return z / (1.0 + z);
}

inline double softplus_tail(double e) {
  return std::fmax(e, 0.0) + std::log1p(std::exp(-std::fabs(e)));
}

// Four inverse logits; lanes below the exp clamp are redone in scalar so the
// deep tail matches the reference exactly.
MIMSTD_AVX2 inline __m256d inv_logit_block(const double* in) {
  const __m256d eta = _mm256_loadu_pd(in);
  __m256d v = inv_logit_pd(eta);
  const int deep = _mm256_movemask_pd(_mm256_cmp_pd(eta, _mm256_set1_pd(-708.0), _CMP_LT_OQ));
  if (deep != 0) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    for (int k = 0; k < 4; ++k) {
      if (deep & (1 << k)) lanes[k] = inv_logit_tail(in[k]);
    }
    v = _mm256_load_pd(lanes);
  }
  return v;
}

}  // namespace

MIMSTD_AVX2 void linear_predictor(DesignView x, std::span<const double> beta,
                                  std::span<double> eta) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  double* out = eta.data();
  const double* b = beta.data();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < p; ++j) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(x.data + j * n + i), _mm256_set1_pd(b[j]), acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) acc = std::fma(x.data[j * n + i], b[j], acc);
    out[i] = acc;
  }
}

MIMSTD_AVX2 void inv_logit(std::span<const double> eta, std::span<double> out) {
  const std::size_t n = eta.size();
  const double* in = eta.data();
  double* o = out.data();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(o + i, inv_logit_block(in + i));
  for (; i < n; ++i) o[i] = inv_logit_tail(in[i]);
}

MIMSTD_AVX2 double sum_inv_logit(std::span<const double> eta) {
  const std::size_t n = eta.size();
  const double* in = eta.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, inv_logit_block(in + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += inv_logit_tail(in[i]);
  return s;
}

MIMSTD_AVX2 double bernoulli_loglik(std::span<const double> eta, std::span<const double> y) {
  const std::size_t n = eta.size();
  const double* e = eta.data();
  const double* t = y.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ev = _mm256_loadu_pd(e + i);
    const __m256d term = _mm256_fmsub_pd(_mm256_loadu_pd(t + i), ev, softplus_pd(ev));
    acc = _mm256_add_pd(acc, term);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += t[i] * e[i] - softplus_tail(e[i]);
  return s;
}

}  // namespace mimstd::kernels::avx2
