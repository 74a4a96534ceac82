#include "spim/correlation.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "spim/simd/kernels.hpp"

namespace spim {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc2(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(kPi * x) / (kPi * x);
  return s * s;
}

// exp(+i 2 pi k (p - c) / M) for p = 0..M-1, with the phase reduced modulo M
// in integer arithmetic before it reaches sin/cos.
std::vector<std::complex<double>> phase_row(long k, std::size_t m) {
  const long mm = static_cast<long>(m);
  const long c = (mm - 1) / 2;
  std::vector<std::complex<double>> row(m);
  for (long p = 0; p < mm; ++p) {
    long r = (k * (p - c)) % mm;
    if (r < 0) r += mm;
    row[static_cast<std::size_t>(p)] = std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(mm));
  }
  return row;
}

// sinc^2 at the normalized frequency of sample p seen from an axis shifted by
// `shift` pixels, wrapped into [-M/2, M/2).
std::vector<double> shifted_envelope_axis(std::size_t m, double shift) {
  const double md = static_cast<double>(m);
  const double c = static_cast<double>((m - 1) / 2);
  std::vector<double> axis(m);
  for (std::size_t p = 0; p < m; ++p) {
    double x = static_cast<double>(p) - c - shift;
    x -= md * std::floor(x / md + 0.5);
    axis[p] = sinc2(x / md);
  }
  return axis;
}

}  // namespace

RealizedCoupling::RealizedCoupling(LatticeShape shape)
    : shape_(shape), values_((2 * shape.n_x() - 1) * (2 * shape.n_y() - 1)) {}

double RealizedCoupling::max_abs_error(const CouplingTable& target) const {
  require_same_shape(shape_, target.shape(), "max_abs_error");
  double worst = 0.0;
  for (long ky = -ky_max(); ky <= ky_max(); ++ky) {
    for (long kx = -kx_max(); kx <= kx_max(); ++kx) {
      worst = std::max(worst, std::abs(at(kx, ky) - target.at(kx, ky)));
    }
  }
  return worst;
}

CorrelationKernel synthesize_kernel(const CouplingSpec& target, const LatticeShape& shape, const DetectorGrid& grid) {
  grid.validate_for(shape);
  const CouplingTable g = target.materialize(shape);
  const std::size_t m = grid.size();
  const long mm = static_cast<long>(m);

  std::vector<std::complex<double>> spectrum(m * m);
  for (long ky = -g.ky_max(); ky <= g.ky_max(); ++ky) {
    for (long kx = -g.kx_max(); kx <= g.kx_max(); ++kx) {
      const auto qy = static_cast<std::size_t>((ky + mm) % mm);
      const auto qx = static_cast<std::size_t>((kx + mm) % mm);
      spectrum[qy * m + qx] = g.at(kx, ky);
    }
  }
  // w_p env_p = (1/M^2) sum_k G(k) exp(-i 2 pi k (p - c) / M)
  detail::fft2d_inplace(spectrum.data(), m, detail::FftSign::Negative);

  const std::vector<double> env = grid.envelope();
  const double du2 = grid.pixel_pitch() * grid.pixel_pitch();
  const double norm = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
  const std::size_t c = grid.center();
  CorrelationKernel kernel{grid, shape, std::vector<double>(m * m), target, OriginOffset{}};
  for (std::size_t pv = 0; pv < m; ++pv) {
    const std::size_t qv = (pv + m - c) % m;
    for (std::size_t pu = 0; pu < m; ++pu) {
      const std::size_t qu = (pu + m - c) % m;
      const std::size_t p = pv * m + pu;
      kernel.weights[p] = spectrum[qv * m + qu].real() * norm / (env[p] * du2);
    }
  }
  return kernel;
}

RealizedCoupling realized_coupling(const CorrelationKernel& kernel, const LatticeShape& shape) {
  kernel.grid.validate_for(shape);
  const std::size_t m = kernel.grid.size();
  const double du2 = kernel.grid.pixel_pitch() * kernel.grid.pixel_pitch();
  const std::vector<double> env_u = shifted_envelope_axis(m, kernel.origin_offset.du);
  const std::vector<double> env_v = shifted_envelope_axis(m, kernel.origin_offset.dv);

  RealizedCoupling out(shape);
  const long kx_max = out.kx_max();
  const long ky_max = out.ky_max();

  // partial[pv][kx] = sum_pu g env_u exp(i 2 pi kx (pu - c) / M)
  const std::size_t kx_count = static_cast<std::size_t>(2 * kx_max + 1);
  std::vector<std::complex<double>> partial(m * kx_count);
  for (long kx = -kx_max; kx <= kx_max; ++kx) {
    const auto phases = phase_row(kx, m);
    const auto col = static_cast<std::size_t>(kx + kx_max);
    for (std::size_t pv = 0; pv < m; ++pv) {
      std::complex<double> acc = 0.0;
      for (std::size_t pu = 0; pu < m; ++pu) acc += kernel.weights[pv * m + pu] * env_u[pu] * phases[pu];
      partial[pv * kx_count + col] = acc * env_v[pv];
    }
  }
  for (long ky = -ky_max; ky <= ky_max; ++ky) {
    const auto phases = phase_row(ky, m);
    for (long kx = -kx_max; kx <= kx_max; ++kx) {
      const auto col = static_cast<std::size_t>(kx + kx_max);
      std::complex<double> acc = 0.0;
      for (std::size_t pv = 0; pv < m; ++pv) acc += partial[pv * kx_count + col] * phases[pv];
      out.at(kx, ky) = acc * du2;
    }
  }
  return out;
}

CorrelationKernel align_kernel(const CorrelationKernel& kernel, OriginOffset origin) {
  const double su = origin.du - kernel.origin_offset.du;
  const double sv = origin.dv - kernel.origin_offset.dv;
  CorrelationKernel out = kernel;
  out.origin_offset = origin;
  if (su == 0.0 && sv == 0.0) return out;

  const std::size_t m = kernel.grid.size();
  const long mm = static_cast<long>(m);
  // g_new(p) = g_old(p - s): split s into integer and fractional parts.
  const double fu = std::floor(su);
  const double fv = std::floor(sv);
  const double tu = su - fu;
  const double tv = sv - fv;
  const long iu = static_cast<long>(fu);
  const long iv = static_cast<long>(fv);
  auto wrap = [mm](long i) { return static_cast<std::size_t>(((i % mm) + mm) % mm); };
  for (long pv = 0; pv < mm; ++pv) {
    // source rows p - iv and p - iv - 1, weighted (1 - tv) and tv
    const std::size_t r0 = wrap(pv - iv);
    const std::size_t r1 = wrap(pv - iv - 1);
    for (long pu = 0; pu < mm; ++pu) {
      const std::size_t c0 = wrap(pu - iu);
      const std::size_t c1 = wrap(pu - iu - 1);
      const double top = (1.0 - tu) * kernel.weights[r0 * m + c0] + tu * kernel.weights[r0 * m + c1];
      const double bottom = (1.0 - tu) * kernel.weights[r1 * m + c0] + tu * kernel.weights[r1 * m + c1];
      out.weights[static_cast<std::size_t>(pv) * m + static_cast<std::size_t>(pu)] = (1.0 - tv) * top + tv * bottom;
    }
  }
  return out;
}

double correlate(const DetectorFrame& frame, const CorrelationKernel& kernel) {
  if (!(frame.grid == kernel.grid)) throw DimensionError("correlate: frame and kernel use different detector grids");
  if (frame.intensities.size() != kernel.weights.size()) throw DimensionError("correlate: array sizes differ");
  const double du2 = frame.grid.pixel_pitch() * frame.grid.pixel_pitch();
  if (!(frame.origin_offset == kernel.origin_offset)) {
    const CorrelationKernel aligned = align_kernel(kernel, frame.origin_offset);
    return simd::dot(frame.intensities, aligned.weights) * du2 / frame.exposure_scale;
  }
  return simd::dot(frame.intensities, kernel.weights) * du2 / frame.exposure_scale;
}

}  // namespace spim
