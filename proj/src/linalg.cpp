#include "cpo/linalg.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "cpo/error.hpp"
#include "cpo/kernels.hpp"

namespace cpo::la {

namespace {

inline double abs1(cdouble z) { return std::abs(z.real()) + std::abs(z.imag()); }

}  // namespace

std::vector<cdouble> Matrix::multiply(std::span<const cdouble> x) const {
  std::vector<cdouble> y(n_);
  for (std::size_t r = 0; r < n_; ++r) y[r] = kernels::complex_dot(row(r), x);
  return y;
}

std::vector<cdouble> lu_solve(Matrix a, std::vector<cdouble> b, SolveReport* report,
                              double max_pivot_ratio) {
  const std::size_t n = a.size();
  if (b.size() != n) throw NumericError("shape_mismatch", "right-hand side length != matrix size");

  double max_pivot = 0.0;
  double min_pivot = INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = abs1(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = abs1(a(r, k));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (!(best > 0.0)) {
      std::ostringstream os;
      os << "zero pivot in column " << k;
      throw NumericError("singular_system", os.str());
    }
    if (p != k) {
      auto rk = a.row(k);
      auto rp = a.row(p);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(b[k], b[p]);
    }
    const double piv = std::abs(a(k, k));
    max_pivot = std::max(max_pivot, piv);
    min_pivot = std::min(min_pivot, piv);

    const cdouble inv = 1.0 / a(k, k);
    const auto pivot_tail = a.row(k).subspan(k + 1);
    for (std::size_t r = k + 1; r < n; ++r) {
      const cdouble f = a(r, k) * inv;
      if (f == cdouble{}) continue;
      a(r, k) = f;
      kernels::complex_axpy(-f, pivot_tail, a.row(r).subspan(k + 1));
      b[r] -= f * b[k];
    }
  }

  const double ratio = n == 0 ? 1.0 : max_pivot / min_pivot;
  if (report) report->pivot_ratio = ratio;
  if (!(ratio <= max_pivot_ratio)) {
    std::ostringstream os;
    os << "matrix numerically singular (pivot ratio " << ratio << ")";
    throw NumericError("singular_system", os.str());
  }

  std::vector<cdouble> x(n);
  for (std::size_t i = n; i-- > 0;) {
    const auto tail = a.row(i).subspan(i + 1);
    const cdouble s = kernels::complex_dot(tail, std::span<const cdouble>(x).subspan(i + 1));
    x[i] = (b[i] - s) / a(i, i);
  }
  return x;
}

}  // namespace cpo::la
