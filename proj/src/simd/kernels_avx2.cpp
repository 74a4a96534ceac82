#include <immintrin.h>

#include <algorithm>

#include "spim/simd/kernels.hpp"

namespace spim::simd {
namespace {

inline double reduce_lanes(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t lane = 0; i < n; ++i, ++lane) lanes[lane] += a[i] * b[i];
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t lane = 0; i < n; ++i, ++lane) lanes[lane] += a[i];
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double signed_sum_avx2(const double* amps, const std::int8_t* spins, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    int packed;
    __builtin_memcpy(&packed, spins + i, sizeof(packed));
    const __m256d s = _mm256_cvtepi32_pd(_mm_cvtepi8_epi32(_mm_cvtsi32_si128(packed)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(amps + i), s, acc);
  }
  if (i == n) return reduce_lanes(acc);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t lane = 0; i < n; ++i, ++lane) lanes[lane] += amps[i] * spins[i];
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

void intensity_avx2(const std::complex<double>* field, const double* envelope, double scale,
                    double* out, std::size_t n) {
  const auto* raw = reinterpret_cast<const double*>(field);
  const __m256d vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // two complex values per register: (re0 im0 re1 im1), (re2 im2 re3 im3)
    const __m256d lo = _mm256_loadu_pd(raw + 2 * i);
    const __m256d hi = _mm256_loadu_pd(raw + 2 * i + 4);
    const __m256d lo2 = _mm256_mul_pd(lo, lo);
    const __m256d hi2 = _mm256_mul_pd(hi, hi);
    // hadd gives (lo0+lo1, hi0+hi1, lo2+lo3, hi2+hi3) = (|f0|^2, |f2|^2, |f1|^2, |f3|^2)
    const __m256d mag = _mm256_permute4x64_pd(_mm256_hadd_pd(lo2, hi2), _MM_SHUFFLE(3, 1, 2, 0));
    const __m256d env = _mm256_mul_pd(_mm256_loadu_pd(envelope + i), vscale);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(mag, env));
  }
  for (; i < n; ++i) {
    const double re = field[i].real();
    const double im = field[i].imag();
    out[i] = (re * re + im * im) * (envelope[i] * scale);
  }
}

double max_avx2(const double* a, std::size_t n) {
  if (n < 4) return *std::max_element(a, a + n);
  __m256d best = _mm256_loadu_pd(a);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) best = _mm256_max_pd(best, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double result = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) result = std::max(result, a[i]);
  return result;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{dot_avx2, sum_avx2, signed_sum_avx2, intensity_avx2, max_avx2};
  return table;
}

}  // namespace spim::simd
