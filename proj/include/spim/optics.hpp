#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spim/core.hpp"

namespace spim {

// Fourier-lens geometry. Macropixel j sits at x_j = W * (m, n).
struct OpticsParams {
  double wavelength = 532e-9;       // m
  double focal_length = 100e-3;     // m
  double macropixel_width = 16e-6;  // m

  void validate() const;
  // Half-width of the first-order zone A = [-f*lambda/(2W), f*lambda/(2W)]^2.
  double zone_half_width() const { return focal_length * wavelength / (2.0 * macropixel_width); }
};

// Sub-pixel position of the optical axis on the detector, in detector
// pixels relative to the center sample.
struct OriginOffset {
  double du = 0.0;
  double dv = 0.0;

  friend bool operator==(const OriginOffset&, const OriginOffset&) = default;
};

// M x M samples of the first-order zone with pitch f*lambda/(W*M). M is odd
// so that sample (M-1)/2 sits on the axis. Sample p has normalized spatial
// frequency W*u_p/(f*lambda) = (p - (M-1)/2) / M.
class DetectorGrid {
public:
  DetectorGrid(std::size_t samples_per_axis, const OpticsParams& params);
  // Default M = 2 * max(n_x, n_y) + 1.
  static DetectorGrid for_lattice(const LatticeShape& shape, const OpticsParams& params,
                                  std::size_t samples_per_axis = 0);
  // Rebuild from stored values (file import).
  static DetectorGrid from_pitch(std::size_t samples_per_axis, double pixel_pitch);

  std::size_t size() const { return m_; }
  std::size_t center() const { return (m_ - 1) / 2; }
  double pixel_pitch() const { return pitch_; }
  double coordinate(std::size_t p) const { return (static_cast<double>(p) - static_cast<double>(center())) * pitch_; }
  double normalized_frequency(double p) const { return (p - static_cast<double>(center())) / static_cast<double>(m_); }

  // M >= 2 * max(n_x, n_y) - 1 keeps every lattice difference distinct
  // modulo M. Throws ConfigError otherwise.
  void validate_for(const LatticeShape& shape) const;

  // sinc^2 envelope of a single macropixel at every sample, row-major.
  std::vector<double> envelope() const;

  friend bool operator==(const DetectorGrid&, const DetectorGrid&) = default;

private:
  DetectorGrid(std::size_t m, double pitch, int);
  std::size_t m_;
  double pitch_;
};

struct NoiseModel {
  double read_noise_sigma = 0.0;             // fraction of full scale
  std::optional<double> photon_budget;       // photons at full scale
  std::optional<int> quantization_bits;      // none = ideal ADC
  double saturation_level = 1.0;             // fraction of full scale
  // When set, every frame is exposed so its own peak maps to full scale
  // (real-time adjustment of the input power). Otherwise full scale is the
  // on-axis intensity of an all-up, unit-amplitude mask, N^2.
  bool auto_exposure = false;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool is_noiseless() const { return read_noise_sigma == 0.0 && !photon_budget && !quantization_bits; }
};

struct PhaseMask {
  LatticeShape shape;
  std::vector<double> phases;  // radians, wrapped to (-pi, pi]
};

struct DetectorFrame {
  DetectorGrid grid;
  std::vector<double> intensities;  // M x M, row-major in (v, u)
  OriginOffset origin_offset;
  // Factor applied to |E|^2 before noise; divide by it to recover
  // intensities in units where a single unit emitter gives 1 on axis.
  double exposure_scale = 1.0;

  double at(std::size_t pu, std::size_t pv) const { return intensities[pv * grid.size() + pu]; }
};

enum class FieldMode {
  Physical,  // c_j = exp(i phi_j), checkerboard carrier included
  Ideal,     // c_j = i * Im exp(i phi_j) = i * sigma'_j
};

double wrap_phase(double phi);

// phi_{m,n} = sigma_{m,n} * pi/2 + (-1)^(m+n) * alpha_{m,n}
PhaseMask encode_phase(const GaugeField& gauge, const SpinConfiguration& spins);

// Every macropixel at pi/2: the all-up, unit-amplitude mask used for origin
// calibration.
PhaseMask uniform_mask(const LatticeShape& shape);

// Adds a linear phase ramp that moves the far-field pattern by `shift`
// detector pixels on `grid`.
PhaseMask apply_phase_ramp(const PhaseMask& mask, const DetectorGrid& grid, OriginOffset shift);

// Detector image of the Fourier plane. `frame_index` is mixed into the noise
// seed so successive frames of one run draw independent noise while staying
// reproducible.
DetectorFrame far_field_intensity(const PhaseMask& mask, const OpticsParams& params, const DetectorGrid& grid,
                                  FieldMode mode, const NoiseModel& noise, std::uint64_t frame_index = 0);

// Sub-pixel peak location from a least-squares paraboloid through the 3x3
// neighbourhood of the brightest sample. The fit is done on log intensity
// when all nine samples are positive, which matches the near-Gaussian shape
// of the main lobe; otherwise on raw intensity.
OriginOffset calibrate_origin(const DetectorFrame& frame);

}  // namespace spim
