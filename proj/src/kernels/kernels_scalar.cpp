#include <cstddef>

#include "cpo/kernels.hpp"

// Reference kernels. Complex products are spelled out so that the compiler
// does not route them through the NaN-recovering __muldc3 helper.
namespace cpo::kernels::scalar {

void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xr = x[k].real(), xi = x[k].imag();
    y[k] = {y[k].real() + (ar * xr - ai * xi), y[k].imag() + (ar * xi + ai * xr)};
  }
}

cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    re += a[k].real() * b[k].real() - a[k].imag() * b[k].imag();
    im += a[k].real() * b[k].imag() + a[k].imag() * b[k].real();
  }
  return {re, im};
}

cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    re += w[k] * z[k].real();
    im += w[k] * z[k].imag();
  }
  return {re, im};
}

void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out) {
  // Re(n / (g - i d)) = (Re n * g - Im n * d) / (g^2 + d^2)
  const double nr = numer.real(), ni = numer.imag();
  const double g2 = width * width;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double d = delta[k];
    out[k] += (nr * width - ni * d) / (g2 + d * d);
  }
}

}  // namespace cpo::kernels::scalar
