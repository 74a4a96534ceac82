#pragma once

// Data-parallel inner loops used by the Hamiltonian fast path, frame
// synthesis and correlation. Each kernel has a scalar reference and, on
// x86-64, an AVX2/FMA variant. The variant is picked once at runtime from
// CPUID and can be overridden with SPIM_SIMD=scalar|avx2 or set_isa().
//
// Reductions use four interleaved partial sums (lane i takes elements with
// index = i mod 4) in both variants, so scalar and vector results differ
// only by FMA contraction, never by summation order.

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>

namespace spim::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // sum_i amps[i] * spins[i]
  double (*signed_sum)(const double* amps, const std::int8_t* spins, std::size_t n);
  // out[i] = |field[i]|^2 * envelope[i] * scale
  void (*intensity)(const std::complex<double>* field, const double* envelope, double scale,
                    double* out, std::size_t n);
  // max_i a[i]; n >= 1
  double (*max_value)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(SPIM_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool isa_supported(Isa isa);
Isa active_isa();
// Force a variant; throws ConfigError when the CPU lacks it.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

const KernelTable& kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return kernels().sum(a.data(), a.size()); }
inline double signed_sum(std::span<const double> amps, std::span<const std::int8_t> spins) {
  return kernels().signed_sum(amps.data(), spins.data(), amps.size());
}
inline void intensity(std::span<const std::complex<double>> field, std::span<const double> envelope,
                      double scale, std::span<double> out) {
  kernels().intensity(field.data(), envelope.data(), scale, out.data(), field.size());
}
inline double max_value(std::span<const double> a) { return kernels().max_value(a.data(), a.size()); }

}  // namespace spim::simd
