#include "spim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "fft.hpp"
#include "rng.hpp"
#include "spim/simd/kernels.hpp"

namespace spim {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

}  // namespace

void OpticsParams::validate() const {
  if (!(wavelength > 0.0) || !(focal_length > 0.0) || !(macropixel_width > 0.0)) {
    throw ConfigError("optics: wavelength, focal length and macropixel width must be positive");
  }
  if (!std::isfinite(zone_half_width())) throw ConfigError("optics: zone half-width is not finite");
}

DetectorGrid::DetectorGrid(std::size_t m, double pitch, int) : m_(m), pitch_(pitch) {
  if (m_ == 0 || m_ % 2 == 0) throw ConfigError("detector samples per axis must be odd, got " + std::to_string(m_));
  if (!(pitch_ > 0.0) || !std::isfinite(pitch_)) throw ConfigError("detector pixel pitch must be positive");
}

DetectorGrid::DetectorGrid(std::size_t samples_per_axis, const OpticsParams& params)
    : DetectorGrid(samples_per_axis,
                   (params.validate(), params.focal_length * params.wavelength /
                                           (params.macropixel_width * static_cast<double>(samples_per_axis))),
                   0) {}

DetectorGrid DetectorGrid::for_lattice(const LatticeShape& shape, const OpticsParams& params,
                                       std::size_t samples_per_axis) {
  const std::size_t m = samples_per_axis != 0 ? samples_per_axis : 2 * std::max(shape.n_x(), shape.n_y()) + 1;
  DetectorGrid grid(m, params);
  grid.validate_for(shape);
  return grid;
}

DetectorGrid DetectorGrid::from_pitch(std::size_t samples_per_axis, double pixel_pitch) {
  return DetectorGrid(samples_per_axis, pixel_pitch, 0);
}

void DetectorGrid::validate_for(const LatticeShape& shape) const {
  const std::size_t needed = 2 * std::max(shape.n_x(), shape.n_y()) - 1;
  if (m_ < needed) {
    throw ConfigError("detector grid has " + std::to_string(m_) + " samples per axis; lattice needs at least " +
                      std::to_string(needed));
  }
}

std::vector<double> DetectorGrid::envelope() const {
  std::vector<double> axis(m_);
  for (std::size_t p = 0; p < m_; ++p) {
    const double s = sinc(normalized_frequency(static_cast<double>(p)));
    axis[p] = s * s;
  }
  std::vector<double> env(m_ * m_);
  for (std::size_t pv = 0; pv < m_; ++pv) {
    for (std::size_t pu = 0; pu < m_; ++pu) env[pv * m_ + pu] = axis[pv] * axis[pu];
  }
  return env;
}

void NoiseModel::validate() const {
  if (!(read_noise_sigma >= 0.0)) throw ConfigError("noise: read_noise_sigma must be >= 0");
  if (photon_budget && !(*photon_budget > 0.0)) throw ConfigError("noise: photon_budget must be positive");
  if (quantization_bits && (*quantization_bits < 1 || *quantization_bits > 16)) {
    throw ConfigError("noise: quantization_bits must lie in [1, 16]");
  }
  if (!(saturation_level > 0.0)) throw ConfigError("noise: saturation_level must be positive");
}

double wrap_phase(double phi) {
  double wrapped = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

PhaseMask encode_phase(const GaugeField& gauge, const SpinConfiguration& spins) {
  require_same_shape(gauge.shape, spins.shape(), "encode_phase");
  PhaseMask mask{spins.shape(), std::vector<double>(spins.size())};
  for (std::size_t j = 0; j < spins.size(); ++j) {
    const double phi = spins[j] * (kPi / 2.0) + spins.shape().checkerboard(j) * gauge.angles[j];
    mask.phases[j] = wrap_phase(phi);
  }
  return mask;
}

PhaseMask uniform_mask(const LatticeShape& shape) {
  return PhaseMask{shape, std::vector<double>(shape.size(), kPi / 2.0)};
}

PhaseMask apply_phase_ramp(const PhaseMask& mask, const DetectorGrid& grid, OriginOffset shift) {
  PhaseMask out = mask;
  const double m = static_cast<double>(grid.size());
  for (std::size_t j = 0; j < out.phases.size(); ++j) {
    const double col = static_cast<double>(mask.shape.column(j) - 1);
    const double row = static_cast<double>(mask.shape.row(j) - 1);
    out.phases[j] = wrap_phase(out.phases[j] - 2.0 * kPi * (col * shift.du + row * shift.dv) / m);
  }
  return out;
}

DetectorFrame far_field_intensity(const PhaseMask& mask, const OpticsParams& params, const DetectorGrid& grid,
                                  FieldMode mode, const NoiseModel& noise, std::uint64_t frame_index) {
  params.validate();
  noise.validate();
  grid.validate_for(mask.shape);
  if (mask.phases.size() != mask.shape.size()) throw DimensionError("phase mask length does not match lattice");

  const std::size_t m = grid.size();
  const std::size_t nx = mask.shape.n_x();
  const std::size_t ny = mask.shape.n_y();

  // Emitter amplitudes on the zero-padded M x M lattice, origin at index 0.
  std::vector<std::complex<double>> field(m * m);
  for (std::size_t n = 0; n < ny; ++n) {
    for (std::size_t mm = 0; mm < nx; ++mm) {
      const double phi = mask.phases[n * nx + mm];
      field[n * m + mm] = mode == FieldMode::Physical ? std::polar(1.0, phi)
                                                      : std::complex<double>(0.0, std::sin(phi));
    }
  }
  // E(p) = sum_j c_j exp(+i 2 pi j (p - c) / M): positive-sign DFT read at (p - c) mod M.
  detail::fft2d_inplace(field.data(), m, detail::FftSign::Positive);

  DetectorFrame frame{grid, std::vector<double>(m * m), OriginOffset{}, 1.0};
  const std::vector<double> env = grid.envelope();
  const double n_total = static_cast<double>(mask.shape.size());
  const double fixed_scale = 1.0 / (n_total * n_total);
  const double first_pass_scale = noise.auto_exposure ? 1.0 : fixed_scale;
  const std::size_t c = grid.center();
  for (std::size_t pv = 0; pv < m; ++pv) {
    const std::complex<double>* src = field.data() + ((pv + m - c) % m) * m;
    double* dst = frame.intensities.data() + pv * m;
    const double* env_row = env.data() + pv * m;
    // columns [0, c) come from DFT bins [m - c, m), columns [c, m) from [0, m - c)
    simd::kernels().intensity(src + (m - c), env_row, first_pass_scale, dst, c);
    simd::kernels().intensity(src, env_row + c, first_pass_scale, dst + c, m - c);
  }

  frame.exposure_scale = fixed_scale;
  if (noise.auto_exposure) {
    const double peak = simd::max_value(frame.intensities);
    frame.exposure_scale = peak > 0.0 ? 1.0 / peak : fixed_scale;
    for (double& v : frame.intensities) v *= frame.exposure_scale;
  }

  // Detector chain in physical order: shot, read, clip, quantize. Samples are
  // drawn in pixel index order.
  std::mt19937_64 rng(detail::mix_seed(noise.rng_seed, frame_index));
  std::normal_distribution<double> gaussian(0.0, 1.0);
  const double levels = noise.quantization_bits ? std::ldexp(1.0, *noise.quantization_bits) - 1.0 : 0.0;
  for (double& v : frame.intensities) {
    if (noise.photon_budget) {
      std::poisson_distribution<long long> shot(std::max(v, 0.0) * *noise.photon_budget);
      v = static_cast<double>(shot(rng)) / *noise.photon_budget;
    }
    if (noise.read_noise_sigma > 0.0) v += noise.read_noise_sigma * gaussian(rng);
    v = std::clamp(v, 0.0, noise.saturation_level);
    if (noise.quantization_bits) {
      v = std::nearbyint(v / noise.saturation_level * levels) * (noise.saturation_level / levels);
    }
  }
  return frame;
}

OriginOffset calibrate_origin(const DetectorFrame& frame) {
  const std::size_t m = frame.grid.size();
  if (frame.intensities.size() != m * m) throw DimensionError("frame intensities do not match grid");
  const auto peak_it = std::max_element(frame.intensities.begin(), frame.intensities.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - frame.intensities.begin());
  const std::size_t pu = peak % m;
  const std::size_t pv = peak / m;
  if (pu == 0 || pv == 0 || pu + 1 == m || pv + 1 == m) {
    throw CalibrationError("intensity peak lies on the detector boundary");
  }

  // Separable log-parabola fit on the column and row sums of the 3x3 stencil.
  double col_sum[3] = {0, 0, 0};
  double row_sum[3] = {0, 0, 0};
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double v = frame.at(pu + dx, pv + dy);
      col_sum[dx + 1] += v;
      row_sum[dy + 1] += v;
    }
  }
  const auto vertex = [](double s[3]) {
    if (s[0] > 0.0 && s[1] > 0.0 && s[2] > 0.0) {
      for (int i = 0; i < 3; ++i) s[i] = std::log(s[i]);
    }
    const double curvature = s[0] - 2.0 * s[1] + s[2];
    if (!(curvature < 0.0)) throw CalibrationError("intensity peak is not a local maximum");
    const double x = 0.5 * (s[0] - s[2]) / curvature;
    if (std::abs(x) > 1.0) throw CalibrationError("parabola vertex outside the fit stencil");
    return x;
  };
  const double x = vertex(col_sum);
  const double y = vertex(row_sum);

  const double center = static_cast<double>(frame.grid.center());
  return OriginOffset{static_cast<double>(pu) - center + x, static_cast<double>(pv) - center + y};
}

}  // namespace spim
