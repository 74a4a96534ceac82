#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

#include "spim/core.hpp"

namespace spim {

struct PartitionSummary {
  double sum_up = 0.0;    // sum of xi_j over sigma_j = +1
  double sum_down = 0.0;  // sum of xi_j over sigma_j = -1
  double difference = 0.0;
  double fidelity = 0.0;  // |sum_up - sum_down| / (sum_up + sum_down)
};

// i.i.d. uniform on (0, 1], drawn as 1 - U[0, 1).
AmplitudeSet generate_instance(const LatticeShape& shape, std::uint64_t seed);

// Instance with xi_j = xi_{N+1-j} (dyadic, k / 2^20) and its zero-imbalance ground state
// (first half up, mirrored half down). Throws DomainError for odd N.
std::pair<AmplitudeSet, SpinConfiguration> generate_parity_instance(const LatticeShape& shape, std::uint64_t seed);

PartitionSummary summarize(const SpinConfiguration& spins, const AmplitudeSet& amps);

inline constexpr std::size_t kBruteForceLimit = 24;

struct OptimalPartition {
  double difference;
  SpinConfiguration spins;
};

// Exhaustive search over 2^(N-1) partitions (last spin pinned to +1) using a
// Gray-code walk. Refuses N > kBruteForceLimit with ConfigError.
OptimalPartition brute_force_optimum(const AmplitudeSet& amps);

// Descending-order greedy: each element joins the currently lighter subset.
SpinConfiguration greedy_baseline(const AmplitudeSet& amps);

// Instance file: header "n_x n_y seed", then one xi per line.
// Partition file: same header, then one +1/-1 per line.
void write_instance(const std::filesystem::path& path, const AmplitudeSet& amps, std::uint64_t seed);
struct InstanceFile {
  AmplitudeSet amps;
  std::uint64_t seed;
};
InstanceFile read_instance(const std::filesystem::path& path);

void write_partition(const std::filesystem::path& path, const SpinConfiguration& spins, std::uint64_t seed);
SpinConfiguration read_partition(const std::filesystem::path& path);

}  // namespace spim
