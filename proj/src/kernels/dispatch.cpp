#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cpo/kernels.hpp"

namespace cpo::kernels {

namespace {

struct Table {
  void (*axpy)(cdouble, std::span<const cdouble>, std::span<cdouble>);
  cdouble (*dot)(std::span<const cdouble>, std::span<const cdouble>);
  cdouble (*wsum)(std::span<const double>, std::span<const cdouble>);
  void (*lorentz)(cdouble, double, std::span<const double>, std::span<double>);
};

constexpr Table scalar_table{scalar::complex_axpy, scalar::complex_dot, scalar::weighted_sum,
                             scalar::lorentzian_accumulate};

#if defined(CPO_HAVE_AVX2)
constexpr Table avx2_table{avx2::complex_axpy, avx2::complex_dot, avx2::weighted_sum,
                           avx2::lorentzian_accumulate};
#endif

bool cpu_has_avx2() {
#if defined(CPO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Isa isa) {
#if defined(CPO_HAVE_AVX2)
  if (isa == Isa::avx2) return &avx2_table;
#endif
  (void)isa;
  return &scalar_table;
}

Isa initial_isa() {
  if (const char* env = std::getenv("CPO_ISA")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return detected_isa();
}

std::atomic<const Table*>& active_table() {
  static std::atomic<const Table*> table{table_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active_tag() {
  static std::atomic<Isa> tag{initial_isa()};
  return tag;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa detected_isa() { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return active_tag().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("kernel ISA " + std::string(to_string(isa)) + " not supported");
  active_tag().store(isa, std::memory_order_relaxed);
  active_table().store(table_for(isa), std::memory_order_relaxed);
}

void complex_axpy(cdouble a, std::span<const cdouble> x, std::span<cdouble> y) {
  active_table().load(std::memory_order_relaxed)->axpy(a, x, y);
}

cdouble complex_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  return active_table().load(std::memory_order_relaxed)->dot(a, b);
}

cdouble weighted_sum(std::span<const double> w, std::span<const cdouble> z) {
  return active_table().load(std::memory_order_relaxed)->wsum(w, z);
}

void lorentzian_accumulate(cdouble numer, double width, std::span<const double> delta,
                           std::span<double> out) {
  active_table().load(std::memory_order_relaxed)->lorentz(numer, width, delta, out);
}

}  // namespace cpo::kernels
