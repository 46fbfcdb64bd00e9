#pragma once

#include <complex>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant. The variant is chosen
// once at startup from CPUID; CPO_ISA=scalar in the environment or
// set_active_isa() forces the reference path.
//
// Vector variants reorder floating-point sums, so results agree with the
// scalar path to rounding, not bit for bit. Within one ISA every kernel is
// deterministic.
namespace cpo::kernels {

using cdouble = std::complex<double>;

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);
Isa detected_isa();
Isa active_isa();
// Throws std::invalid_argument for an ISA the CPU or build does not support.
void set_active_isa(Isa isa);

// y[k] += a * x[k]
void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y);

// sum_k a[k] * b[k] (no conjugation)
cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b);

// sum_k w[k] * z[k] with real weights
cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z);

// out[k] += Re( numer / (width - i*delta[k]) )
void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out);

namespace scalar {
void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y);
cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b);
cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z);
void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out);
}  // namespace scalar

namespace avx2 {
void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y);
cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b);
cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z);
void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out);
}  // namespace avx2

}  // namespace cpo::kernels
