#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cpo::la {

using cdouble = std::complex<double>;

/// Dense square complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n) {}

  std::size_t size() const { return n_; }
  cdouble& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  std::span<cdouble> row(std::size_t r) { return {data_.data() + r * n_, n_}; }
  std::span<const cdouble> row(std::size_t r) const { return {data_.data() + r * n_, n_}; }

  void fill(cdouble v) { std::fill(data_.begin(), data_.end(), v); }

  std::vector<cdouble> multiply(std::span<const cdouble> x) const;

 private:
  std::size_t n_ = 0;
  std::vector<cdouble> data_;
};

struct SolveReport {
  // max |u_kk| / min |u_kk| of the LU factor; a cheap conditioning indicator.
  double pivot_ratio = 1.0;
};

/// Solves A x = b by LU with partial pivoting. A and b are consumed.
/// Throws NumericError("singular_system") when a pivot vanishes or the pivot
/// ratio exceeds `max_pivot_ratio`.
std::vector<cdouble> lu_solve(Matrix a, std::vector<cdouble> b, SolveReport* report = nullptr,
                              double max_pivot_ratio = 1e13);

}  // namespace cpo::la
