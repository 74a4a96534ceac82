#include "spim/problems.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "io_util.hpp"

namespace spim {

AmplitudeSet generate_instance(const LatticeShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> xi(shape.size());
  for (double& v : xi) v = 1.0 - uniform(rng);
  return AmplitudeSet(shape, std::move(xi));
}

std::pair<AmplitudeSet, SpinConfiguration> generate_parity_instance(const LatticeShape& shape, std::uint64_t seed) {
  const std::size_t n = shape.size();
  if (n % 2 != 0) throw DomainError("parity instance needs an even number of spins");
  // Dyadic values k / 2^20 keep every partial sum exact, so the balanced
  // configuration gives a difference of exactly zero in any summation order.
  constexpr std::uint64_t kLevels = std::uint64_t{1} << 20;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> level(1, kLevels);
  std::vector<double> xi(n);
  std::vector<std::int8_t> sigma(n);
  for (std::size_t j = 0; j < n / 2; ++j) {
    xi[j] = xi[n - 1 - j] = static_cast<double>(level(rng)) / static_cast<double>(kLevels);
    sigma[j] = 1;
    sigma[n - 1 - j] = -1;
  }
  return {AmplitudeSet(shape, std::move(xi)), SpinConfiguration(shape, std::move(sigma))};
}

PartitionSummary summarize(const SpinConfiguration& spins, const AmplitudeSet& amps) {
  require_same_shape(spins.shape(), amps.shape(), "summarize");
  PartitionSummary s;
  for (std::size_t j = 0; j < spins.size(); ++j) (spins[j] > 0 ? s.sum_up : s.sum_down) += amps[j];
  s.difference = std::abs(s.sum_up - s.sum_down);
  s.fidelity = s.difference / (s.sum_up + s.sum_down);
  return s;
}

OptimalPartition brute_force_optimum(const AmplitudeSet& amps) {
  const std::size_t n = amps.size();
  if (n > kBruteForceLimit) {
    throw ConfigError("brute force limited to N <= " + std::to_string(kBruteForceLimit) + ", got " +
                      std::to_string(n));
  }
  // Spins 0..n-2 walk a Gray code; spin n-1 stays +1 (global flip symmetry).
  std::vector<std::int8_t> sigma(n, 1);
  double sum = amps.total();
  double best = std::abs(sum);
  std::vector<std::int8_t> best_sigma = sigma;
  const std::uint64_t count = n > 1 ? (std::uint64_t{1} << (n - 1)) : 1;
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(g));
    sigma[bit] = static_cast<std::int8_t>(-sigma[bit]);
    sum += 2.0 * sigma[bit] * amps[bit];
    if (std::abs(sum) < best) {
      best = std::abs(sum);
      best_sigma = sigma;
    }
  }
  // Re-evaluate the winner from scratch so drift in the running sum does not
  // leak into the reported value.
  SpinConfiguration spins(amps.shape(), std::move(best_sigma));
  return OptimalPartition{summarize(spins, amps).difference, std::move(spins)};
}

SpinConfiguration greedy_baseline(const AmplitudeSet& amps) {
  std::vector<std::size_t> order(amps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return amps[a] > amps[b]; });
  std::vector<std::int8_t> sigma(amps.size(), 1);
  double up = 0.0;
  double down = 0.0;
  for (std::size_t j : order) {
    if (up <= down) {
      sigma[j] = 1;
      up += amps[j];
    } else {
      sigma[j] = -1;
      down += amps[j];
    }
  }
  return SpinConfiguration(amps.shape(), std::move(sigma));
}

namespace {

struct Header {
  std::size_t n_x;
  std::size_t n_y;
  std::uint64_t seed;
};

std::string header_line(const LatticeShape& shape, std::uint64_t seed) {
  return std::to_string(shape.n_x()) + " " + std::to_string(shape.n_y()) + " " + std::to_string(seed) + "\n";
}

Header parse_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
  std::istringstream fields(line);
  Header h{};
  if (!(fields >> h.n_x >> h.n_y >> h.seed) || h.n_x == 0 || h.n_y == 0) {
    throw IoError("bad header in " + path.string() + ": expected 'n_x n_y seed'");
  }
  return h;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_instance(const std::filesystem::path& path, const AmplitudeSet& amps, std::uint64_t seed) {
  std::string text = header_line(amps.shape(), seed);
  for (double v : amps.values()) text += detail::format_double(v) + "\n";
  detail::write_file_atomic(path, text);
}

InstanceFile read_instance(const std::filesystem::path& path) {
  auto in = open_input(path);
  const Header h = parse_header(in, path);
  std::vector<double> xi;
  xi.reserve(h.n_x * h.n_y);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    xi.push_back(detail::parse_double(line, path));
  }
  if (xi.size() != h.n_x * h.n_y) throw IoError("instance value count does not match header in " + path.string());
  try {
    return InstanceFile{AmplitudeSet(LatticeShape(h.n_x, h.n_y), std::move(xi)), h.seed};
  } catch (const DomainError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_partition(const std::filesystem::path& path, const SpinConfiguration& spins, std::uint64_t seed) {
  std::string text = header_line(spins.shape(), seed);
  for (auto s : spins.values()) text += s > 0 ? "1\n" : "-1\n";
  detail::write_file_atomic(path, text);
}

SpinConfiguration read_partition(const std::filesystem::path& path) {
  auto in = open_input(path);
  const Header h = parse_header(in, path);
  std::vector<std::int8_t> sigma;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const double v = detail::parse_double(line, path);
    if (v != 1.0 && v != -1.0) throw IoError("partition entries must be +1 or -1 in " + path.string());
    sigma.push_back(static_cast<std::int8_t>(v));
  }
  if (sigma.size() != h.n_x * h.n_y) throw IoError("partition entry count does not match header in " + path.string());
  return SpinConfiguration(LatticeShape(h.n_x, h.n_y), std::move(sigma));
}

}  // namespace spim
