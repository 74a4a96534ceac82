#include <algorithm>

#include "spim/simd/kernels.hpp"

namespace spim::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += a[i] * b[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double sum_scalar(const double* a, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i];
    acc[1] += a[i + 1];
    acc[2] += a[i + 2];
    acc[3] += a[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += a[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double signed_sum_scalar(const double* amps, const std::int8_t* spins, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += amps[i] * spins[i];
    acc[1] += amps[i + 1] * spins[i + 1];
    acc[2] += amps[i + 2] * spins[i + 2];
    acc[3] += amps[i + 3] * spins[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += amps[i] * spins[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

void intensity_scalar(const std::complex<double>* field, const double* envelope, double scale,
                      double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = field[i].real();
    const double im = field[i].imag();
    out[i] = (re * re + im * im) * envelope[i] * scale;
  }
}

double max_scalar(const double* a, std::size_t n) { return *std::max_element(a, a + n); }

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar, sum_scalar, signed_sum_scalar, intensity_scalar, max_scalar};
  return table;
}

}  // namespace spim::simd
