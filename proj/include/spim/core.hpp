#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spim/errors.hpp"

namespace spim {

// Rectangular macropixel lattice. Spin index j maps to the 1-based lattice
// coordinate (m, n) in row-major order with m fastest:
//   j = (n - 1) * n_x + (m - 1).
class LatticeShape {
public:
  LatticeShape(std::size_t n_x, std::size_t n_y);

  std::size_t n_x() const { return n_x_; }
  std::size_t n_y() const { return n_y_; }
  std::size_t size() const { return n_x_ * n_y_; }

  std::size_t index(std::size_t m, std::size_t n) const { return (n - 1) * n_x_ + (m - 1); }
  std::size_t column(std::size_t j) const { return j % n_x_ + 1; }
  std::size_t row(std::size_t j) const { return j / n_x_ + 1; }
  // (-1)^(m+n) for spin j.
  int checkerboard(std::size_t j) const { return ((column(j) + row(j)) % 2 == 0) ? 1 : -1; }

  friend bool operator==(const LatticeShape&, const LatticeShape&) = default;

private:
  std::size_t n_x_;
  std::size_t n_y_;
};

// Binary spins sigma_j in {+1, -1}.
class SpinConfiguration {
public:
  SpinConfiguration(LatticeShape shape, std::vector<std::int8_t> spins);
  static SpinConfiguration all_up(LatticeShape shape);

  const LatticeShape& shape() const { return shape_; }
  std::size_t size() const { return spins_.size(); }
  int operator[](std::size_t j) const { return spins_[j]; }
  std::span<const std::int8_t> values() const { return spins_; }

  void flip(std::size_t j) { spins_[j] = static_cast<std::int8_t>(-spins_[j]); }
  SpinConfiguration flipped() const;

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

private:
  LatticeShape shape_;
  std::vector<std::int8_t> spins_;
};

// Mattis amplitudes xi_j, each in (0, 1].
class AmplitudeSet {
public:
  AmplitudeSet(LatticeShape shape, std::vector<double> amplitudes);

  const LatticeShape& shape() const { return shape_; }
  std::size_t size() const { return amplitudes_.size(); }
  double operator[](std::size_t j) const { return amplitudes_[j]; }
  std::span<const double> values() const { return amplitudes_; }
  double total() const;

  friend bool operator==(const AmplitudeSet&, const AmplitudeSet&) = default;

private:
  LatticeShape shape_;
  std::vector<double> amplitudes_;
};

// Result of rotating every spin by alpha_j = arccos(xi_j). The z projections
// sigma'_j = xi_j * sigma_j interact with uniform strength.
struct GaugeField {
  LatticeShape shape;
  std::vector<double> angles;
  std::vector<double> effective_spins;
};

// Coupling G(k) on the difference set k in [-(n_x-1), n_x-1] x [-(n_y-1), n_y-1].
class CouplingTable {
public:
  CouplingTable(LatticeShape shape, std::vector<double> values);
  static CouplingTable constant(LatticeShape shape, double value);

  const LatticeShape& shape() const { return shape_; }
  long kx_max() const { return static_cast<long>(shape_.n_x()) - 1; }
  long ky_max() const { return static_cast<long>(shape_.n_y()) - 1; }
  std::size_t width() const { return 2 * shape_.n_x() - 1; }
  std::size_t height() const { return 2 * shape_.n_y() - 1; }

  double at(long kx, long ky) const { return values_[offset(kx, ky)]; }
  double& at(long kx, long ky) { return values_[offset(kx, ky)]; }
  std::span<const double> values() const { return values_; }

  bool is_symmetric(double tolerance = 0.0) const;
  CouplingTable scaled(double factor) const;

private:
  std::size_t offset(long kx, long ky) const {
    return static_cast<std::size_t>(ky + ky_max()) * width() + static_cast<std::size_t>(kx + kx_max());
  }

  LatticeShape shape_;
  std::vector<double> values_;
};

enum class CouplingKind { UniformAntiferromagnetic, TableOfG };

struct CouplingSpec {
  CouplingKind kind = CouplingKind::UniformAntiferromagnetic;
  double strength = -1.0;
  std::optional<CouplingTable> g_table;

  static CouplingSpec uniform_antiferromagnetic(double strength = -1.0);
  static CouplingSpec table(CouplingTable g);

  // Materialize G(k) over the difference set of `shape`. Throws SpecError for
  // a non-symmetric table, a table on another lattice, or a uniform target
  // that is not antiferromagnetic.
  CouplingTable materialize(const LatticeShape& shape) const;
};

GaugeField gauge_transform(const SpinConfiguration& spins, const AmplitudeSet& amps);

// Slow O(N^2) reference: H = -J * sum_{j,h} xi_j xi_h sigma_j sigma_h.
double exact_hamiltonian_mattis(const SpinConfiguration& spins, const AmplitudeSet& amps, double J);

// Fast path for the uniform antiferromagnet: H = (sum_j sigma'_j)^2.
double exact_hamiltonian_uniform(const GaugeField& gauge);

// Same quantity straight from spins and amplitudes, without materializing
// the gauge field. This is the solver's hot path.
double effective_spin_sum(const SpinConfiguration& spins, const AmplitudeSet& amps);

// |m'| = |sum_j sigma'_j| / N.
double magnetization(const GaugeField& gauge);
double magnetization(const SpinConfiguration& spins, const AmplitudeSet& amps);

void require_same_shape(const LatticeShape& a, const LatticeShape& b, const char* what);

}  // namespace spim
