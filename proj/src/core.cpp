#include "spim/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "spim/simd/kernels.hpp"

namespace spim {

LatticeShape::LatticeShape(std::size_t n_x, std::size_t n_y) : n_x_(n_x), n_y_(n_y) {
  if (n_x == 0 || n_y == 0) throw DimensionError("lattice dimensions must be positive");
}

void require_same_shape(const LatticeShape& a, const LatticeShape& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": lattice shapes differ (" + std::to_string(a.n_x()) + "x" +
                         std::to_string(a.n_y()) + " vs " + std::to_string(b.n_x()) + "x" +
                         std::to_string(b.n_y()) + ")");
  }
}

SpinConfiguration::SpinConfiguration(LatticeShape shape, std::vector<std::int8_t> spins)
    : shape_(shape), spins_(std::move(spins)) {
  if (spins_.size() != shape_.size()) throw DimensionError("spin array length does not match lattice");
  for (auto s : spins_) {
    if (s != 1 && s != -1) throw DomainError("spins must be +1 or -1");
  }
}

SpinConfiguration SpinConfiguration::all_up(LatticeShape shape) {
  return SpinConfiguration(shape, std::vector<std::int8_t>(shape.size(), 1));
}

SpinConfiguration SpinConfiguration::flipped() const {
  SpinConfiguration out = *this;
  for (auto& s : out.spins_) s = static_cast<std::int8_t>(-s);
  return out;
}

AmplitudeSet::AmplitudeSet(LatticeShape shape, std::vector<double> amplitudes)
    : shape_(shape), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != shape_.size()) throw DimensionError("amplitude array length does not match lattice");
  for (double xi : amplitudes_) {
    if (!(xi > 0.0 && xi <= 1.0)) throw DomainError("amplitudes must lie in (0, 1], got " + std::to_string(xi));
  }
}

double AmplitudeSet::total() const { return std::accumulate(amplitudes_.begin(), amplitudes_.end(), 0.0); }

CouplingTable::CouplingTable(LatticeShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (values_.size() != width() * height()) throw DimensionError("coupling table size does not match difference set");
}

CouplingTable CouplingTable::constant(LatticeShape shape, double value) {
  return CouplingTable(shape, std::vector<double>((2 * shape.n_x() - 1) * (2 * shape.n_y() - 1), value));
}

bool CouplingTable::is_symmetric(double tolerance) const {
  for (long ky = -ky_max(); ky <= ky_max(); ++ky) {
    for (long kx = -kx_max(); kx <= kx_max(); ++kx) {
      if (std::abs(at(kx, ky) - at(-kx, -ky)) > tolerance) return false;
    }
  }
  return true;
}

CouplingTable CouplingTable::scaled(double factor) const {
  CouplingTable out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

CouplingSpec CouplingSpec::uniform_antiferromagnetic(double strength) {
  CouplingSpec spec;
  spec.kind = CouplingKind::UniformAntiferromagnetic;
  spec.strength = strength;
  return spec;
}

CouplingSpec CouplingSpec::table(CouplingTable g) {
  CouplingSpec spec;
  spec.kind = CouplingKind::TableOfG;
  spec.strength = 1.0;
  spec.g_table = std::move(g);
  return spec;
}

CouplingTable CouplingSpec::materialize(const LatticeShape& shape) const {
  if (kind == CouplingKind::UniformAntiferromagnetic) {
    if (!(strength < 0.0)) throw SpecError("uniform antiferromagnetic coupling needs a negative strength");
    return CouplingTable::constant(shape, strength);
  }
  if (!g_table) throw SpecError("table coupling without a G table");
  if (!(g_table->shape() == shape)) throw SpecError("G table was built for a different lattice");
  if (!g_table->is_symmetric()) throw SpecError("G table must satisfy G(k) = G(-k)");
  return *g_table;
}

GaugeField gauge_transform(const SpinConfiguration& spins, const AmplitudeSet& amps) {
  require_same_shape(spins.shape(), amps.shape(), "gauge_transform");
  const std::size_t n = spins.size();
  GaugeField gauge{spins.shape(), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    gauge.angles[j] = std::acos(amps[j]);
    gauge.effective_spins[j] = amps[j] * spins[j];
  }
  return gauge;
}

double exact_hamiltonian_mattis(const SpinConfiguration& spins, const AmplitudeSet& amps, double J) {
  require_same_shape(spins.shape(), amps.shape(), "exact_hamiltonian_mattis");
  const std::size_t n = spins.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t h = 0; h < n; ++h) total += amps[j] * amps[h] * spins[j] * spins[h];
  }
  return -J * total;
}

double exact_hamiltonian_uniform(const GaugeField& gauge) {
  const double sum = simd::sum(gauge.effective_spins);
  return sum * sum;
}

double effective_spin_sum(const SpinConfiguration& spins, const AmplitudeSet& amps) {
  require_same_shape(spins.shape(), amps.shape(), "effective_spin_sum");
  return simd::signed_sum(amps.values(), spins.values());
}

double magnetization(const GaugeField& gauge) {
  return std::abs(simd::sum(gauge.effective_spins)) / static_cast<double>(gauge.effective_spins.size());
}

double magnetization(const SpinConfiguration& spins, const AmplitudeSet& amps) {
  return std::abs(effective_spin_sum(spins, amps)) / static_cast<double>(spins.size());
}

}  // namespace spim
