#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "spim/core.hpp"
#include "spim/correlation.hpp"
#include "spim/optics.hpp"

namespace spim {

enum class Backend {
  OpticalPhysical,  // full phase mask, carrier included
  OpticalIdeal,     // carrier-free field i * sigma'
  ExactFast,        // (sum_j xi_j sigma_j)^2, no optics
};

std::string_view backend_name(Backend backend);
// Accepts "optical-physical", "optical-ideal", "exact-fast".
Backend parse_backend(std::string_view name);

struct SolverConfig {
  std::size_t max_iterations = 1000;
  // Spins flipped per tentative update: max(1, round(flip_fraction * N * flip_decay^t)).
  double flip_fraction = 0.05;
  double flip_decay = 0.98;
  // T_t = initial_temperature * temperature_decay^t; 0 means strict descent.
  double initial_temperature = 0.0;
  double temperature_decay = 0.995;
  // A candidate must undercut the current H by accept_margin * N^2. Keeps
  // accept/reject decisions stable against round-off across backends.
  double accept_margin = 1e-9;
  // Capture a fresh frame of the retained state every step instead of reusing
  // the value measured when it was accepted.
  bool remeasure_current = false;
  Backend backend = Backend::ExactFast;
  OpticsParams optics;
  std::size_t detector_samples = 0;  // 0 = 2 * max(n_x, n_y) + 1
  NoiseModel noise;
  std::uint64_t rng_seed = 0;
  std::optional<SpinConfiguration> initial_state;  // default: all up

  void validate() const;
};

struct TrajectoryRecord {
  std::size_t iteration = 0;
  double hamiltonian = 0.0;    // H of the retained state as evaluated by the backend
  double magnetization = 0.0;  // exact |m'| of the retained state
  bool accepted = false;
  std::size_t flips = 0;
  double wall_ms = 0.0;
};

struct RunResult {
  std::vector<TrajectoryRecord> trajectory;  // row 0 is the initial state
  SpinConfiguration final_spins;
  SpinConfiguration best_spins;
  double best_hamiltonian;
};

std::size_t flips_for_iteration(const SolverConfig& config, std::size_t n, std::size_t iteration);
double temperature_at(const SolverConfig& config, std::size_t iteration);

// Flip a uniformly random subset of flips_for_iteration(...) spins.
SpinConfiguration propose(const SolverConfig& config, const SpinConfiguration& spins, std::size_t iteration,
                          std::mt19937_64& rng);

// Maps a spin configuration to a Hamiltonian value. Optical evaluators own a
// calibrated kernel and draw detector noise per frame index.
class Evaluator {
public:
  virtual ~Evaluator() = default;
  virtual double evaluate(const SpinConfiguration& spins, std::uint64_t frame_index) = 0;
};

class ExactFastEvaluator final : public Evaluator {
public:
  explicit ExactFastEvaluator(AmplitudeSet problem);
  double evaluate(const SpinConfiguration& spins, std::uint64_t frame_index) override;

private:
  AmplitudeSet problem_;
};

class OpticalEvaluator final : public Evaluator {
public:
  // Synthesizes the uniform antiferromagnetic kernel and aligns it to the
  // origin measured from a uniform-phase calibration frame.
  OpticalEvaluator(AmplitudeSet problem, FieldMode mode, const OpticsParams& optics, std::size_t detector_samples,
                   NoiseModel noise);

  double evaluate(const SpinConfiguration& spins, std::uint64_t frame_index) override;
  DetectorFrame render(const SpinConfiguration& spins, std::uint64_t frame_index) const;

  const CorrelationKernel& kernel() const { return kernel_; }
  OriginOffset calibrated_origin() const { return kernel_.origin_offset; }

private:
  AmplitudeSet problem_;
  FieldMode mode_;
  OpticsParams optics_;
  DetectorGrid grid_;
  NoiseModel noise_;
  CorrelationKernel kernel_;
};

std::unique_ptr<Evaluator> make_evaluator(const AmplitudeSet& problem, const SolverConfig& config);

// Optoelectronic search loop: propose, evaluate, accept on decrease (or by
// the Metropolis rule when the temperature is positive).
class Solver {
public:
  Solver(AmplitudeSet problem, SolverConfig config);
  Solver(AmplitudeSet problem, SolverConfig config, std::unique_ptr<Evaluator> evaluator);

  const SpinConfiguration& spins() const { return spins_; }
  double hamiltonian() const { return hamiltonian_; }
  const SpinConfiguration& best_spins() const { return best_spins_; }
  double best_hamiltonian() const { return best_hamiltonian_; }
  std::size_t iteration() const { return iteration_; }

  TrajectoryRecord initial_record() const;
  TrajectoryRecord step();
  RunResult run();

private:
  AmplitudeSet problem_;
  SolverConfig config_;
  std::unique_ptr<Evaluator> evaluator_;
  std::mt19937_64 proposal_rng_;
  std::mt19937_64 acceptance_rng_;
  SpinConfiguration spins_;
  double hamiltonian_;
  SpinConfiguration best_spins_;
  double best_hamiltonian_;
  std::size_t iteration_ = 0;
};

RunResult run(const AmplitudeSet& problem, const SolverConfig& config);

}  // namespace spim
