// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <cstddef>

#include "cpo/kernels.hpp"

namespace cpo::kernels::avx2 {

namespace {

// std::complex<double> is layout-compatible with double[2].
inline const double* raw(const cdouble* p) { return reinterpret_cast<const double*>(p); }
inline double* raw(cdouble* p) { return reinterpret_cast<double*>(p); }

// [re0, im0, re1, im1] -> re0 + re1, im0 + im1
inline cdouble reduce_pairs(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  alignas(16) double out[2];
  _mm_store_pd(out, s);
  return {out[0], out[1]};
}

}  // namespace

void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y) {
  const std::size_t n = x.size();
  const double* xp = raw(x.data());
  double* yp = raw(y.data());
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yp + 2 * k, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * k), prod));
  }
  for (; k < n; ++k) {
    const double xr = x[k].real(), xi = x[k].imag();
    y[k] = {y[k].real() + (a.real() * xr - a.imag() * xi),
            y[k].imag() + (a.real() * xi + a.imag() * xr)};
  }
}

cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  const std::size_t n = a.size();
  const double* ap = raw(a.data());
  const double* bp = raw(b.data());
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d av0 = _mm256_loadu_pd(ap + 2 * k);
    const __m256d bv0 = _mm256_loadu_pd(bp + 2 * k);
    const __m256d av1 = _mm256_loadu_pd(ap + 2 * k + 4);
    const __m256d bv1 = _mm256_loadu_pd(bp + 2 * k + 4);
    const __m256d p0 = _mm256_fmaddsub_pd(
        av0, _mm256_movedup_pd(bv0),
        _mm256_mul_pd(_mm256_permute_pd(av0, 0b0101), _mm256_permute_pd(bv0, 0b1111)));
    const __m256d p1 = _mm256_fmaddsub_pd(
        av1, _mm256_movedup_pd(bv1),
        _mm256_mul_pd(_mm256_permute_pd(av1, 0b0101), _mm256_permute_pd(bv1, 0b1111)));
    acc0 = _mm256_add_pd(acc0, p0);
    acc1 = _mm256_add_pd(acc1, p1);
  }
  for (; k + 2 <= n; k += 2) {
    const __m256d av = _mm256_loadu_pd(ap + 2 * k);
    const __m256d bv = _mm256_loadu_pd(bp + 2 * k);
    acc0 = _mm256_add_pd(
        acc0, _mm256_fmaddsub_pd(
                  av, _mm256_movedup_pd(bv),
                  _mm256_mul_pd(_mm256_permute_pd(av, 0b0101), _mm256_permute_pd(bv, 0b1111))));
  }
  cdouble sum = reduce_pairs(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    sum += cdouble(a[k].real() * b[k].real() - a[k].imag() * b[k].imag(),
                   a[k].real() * b[k].imag() + a[k].imag() * b[k].real());
  }
  return sum;
}

cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z) {
  const std::size_t n = w.size();
  const double* zp = raw(z.data());
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d wv = _mm256_loadu_pd(w.data() + k);
    // [w0 w0 w1 w1] and [w2 w2 w3 w3]
    const __m256d w01 = _mm256_permute4x64_pd(wv, 0b01010000);
    const __m256d w23 = _mm256_permute4x64_pd(wv, 0b11111010);
    acc0 = _mm256_fmadd_pd(w01, _mm256_loadu_pd(zp + 2 * k), acc0);
    acc1 = _mm256_fmadd_pd(w23, _mm256_loadu_pd(zp + 2 * k + 4), acc1);
  }
  cdouble sum = reduce_pairs(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) sum += cdouble(w[k] * z[k].real(), w[k] * z[k].imag());
  return sum;
}

void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out) {
  const std::size_t n = delta.size();
  const __m256d ng = _mm256_set1_pd(numer.real() * width);
  const __m256d ni = _mm256_set1_pd(numer.imag());
  const __m256d g2 = _mm256_set1_pd(width * width);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_loadu_pd(delta.data() + k);
    const __m256d num = _mm256_fnmadd_pd(ni, d, ng);
    const __m256d den = _mm256_fmadd_pd(d, d, g2);
    _mm256_storeu_pd(out.data() + k,
                     _mm256_add_pd(_mm256_loadu_pd(out.data() + k), _mm256_div_pd(num, den)));
  }
  for (; k < n; ++k) {
    const double d = delta[k];
    out[k] += (numer.real() * width - numer.imag() * d) / (width * width + d * d);
  }
}

}  // namespace cpo::kernels::avx2
