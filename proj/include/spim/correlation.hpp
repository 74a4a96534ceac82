#pragma once

#include <complex>
#include <vector>

#include "spim/core.hpp"
#include "spim/optics.hpp"

namespace spim {

// Detector-plane weights g_c(u_p). The Hamiltonian is read out as
// H = -sum_p I(u_p) g_c(u_p) du^2.
struct CorrelationKernel {
  DetectorGrid grid;
  LatticeShape shape;
  std::vector<double> weights;  // M x M, row-major in (v, u), units 1/length^2
  CouplingSpec target;
  OriginOffset origin_offset;   // detector position of the optical axis the weights are centered on

  double at(std::size_t pu, std::size_t pv) const { return weights[pv * grid.size() + pu]; }
};

// Coupling realized by a kernel, G(k) for every lattice difference k. Complex
// because a kernel off the sampled origin realizes G(k) times a phase.
class RealizedCoupling {
public:
  explicit RealizedCoupling(LatticeShape shape);

  const LatticeShape& shape() const { return shape_; }
  long kx_max() const { return static_cast<long>(shape_.n_x()) - 1; }
  long ky_max() const { return static_cast<long>(shape_.n_y()) - 1; }
  std::complex<double> at(long kx, long ky) const { return values_[offset(kx, ky)]; }
  std::complex<double>& at(long kx, long ky) { return values_[offset(kx, ky)]; }

  // max_k |G_realized(k) - G_target(k)|
  double max_abs_error(const CouplingTable& target) const;

private:
  std::size_t offset(long kx, long ky) const {
    return static_cast<std::size_t>(ky + ky_max()) * (2 * shape_.n_x() - 1) + static_cast<std::size_t>(kx + kx_max());
  }

  LatticeShape shape_;
  std::vector<std::complex<double>> values_;
};

// Closed-form inverse of the discretized forward relation
//   sum_p g_c(u_p) sinc^2(W u_p / f lambda) exp(i 2 pi W k.u_p / f lambda) du^2 = G(k)
// via an inverse DFT of the zero-padded G table, then division by the
// envelope and du^2. Bins outside the difference set are left at zero.
CorrelationKernel synthesize_kernel(const CouplingSpec& target, const LatticeShape& shape, const DetectorGrid& grid);

// Direct evaluation of the forward sum for every k (no FFT). The envelope is
// taken at the kernel's origin offset, wrapped periodically on the grid.
RealizedCoupling realized_coupling(const CorrelationKernel& kernel, const LatticeShape& shape);

// Re-centre the kernel on `origin` by periodic bilinear resampling of the
// weights.
CorrelationKernel align_kernel(const CorrelationKernel& kernel, OriginOffset origin);

// F = sum_p I(u_p) g_c(u_p) du^2 / exposure_scale. The kernel is aligned to
// the frame's origin offset first if they differ.
double correlate(const DetectorFrame& frame, const CorrelationKernel& kernel);

inline double hamiltonian_from_frame(const DetectorFrame& frame, const CorrelationKernel& kernel) {
  return -correlate(frame, kernel);
}

}  // namespace spim
