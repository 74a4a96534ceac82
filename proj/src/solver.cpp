#include "spim/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <unordered_set>

#include "rng.hpp"

namespace spim {
namespace {

constexpr std::uint64_t kProposalStream = 1;
constexpr std::uint64_t kAcceptanceStream = 2;
constexpr std::uint64_t kCalibrationFrame = std::uint64_t{1} << 62;
constexpr std::uint64_t kRemeasureFrameBase = std::uint64_t{1} << 61;

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::OpticalPhysical: return "optical-physical";
    case Backend::OpticalIdeal: return "optical-ideal";
    case Backend::ExactFast: return "exact-fast";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "optical-physical") return Backend::OpticalPhysical;
  if (name == "optical-ideal") return Backend::OpticalIdeal;
  if (name == "exact-fast") return Backend::ExactFast;
  throw ConfigError("unknown backend '" + std::string(name) + "' (expected optical-physical, optical-ideal or exact-fast)");
}

void SolverConfig::validate() const {
  if (max_iterations == 0) throw ConfigError("solver: max_iterations must be positive");
  if (!(flip_fraction > 0.0 && flip_fraction <= 1.0)) throw ConfigError("solver: flip_fraction must lie in (0, 1]");
  if (!(flip_decay > 0.0 && flip_decay <= 1.0)) throw ConfigError("solver: flip_decay must lie in (0, 1]");
  if (!(initial_temperature >= 0.0)) throw ConfigError("solver: initial_temperature must be >= 0");
  if (!(temperature_decay > 0.0 && temperature_decay <= 1.0)) {
    throw ConfigError("solver: temperature_decay must lie in (0, 1]");
  }
  if (!(accept_margin >= 0.0)) throw ConfigError("solver: accept_margin must be >= 0");
  optics.validate();
  noise.validate();
}

std::size_t flips_for_iteration(const SolverConfig& config, std::size_t n, std::size_t iteration) {
  const double target =
      config.flip_fraction * static_cast<double>(n) * std::pow(config.flip_decay, static_cast<double>(iteration));
  const auto flips = static_cast<std::size_t>(std::llround(target));
  return std::min(n, std::max<std::size_t>(1, flips));
}

double temperature_at(const SolverConfig& config, std::size_t iteration) {
  if (config.initial_temperature == 0.0) return 0.0;
  return config.initial_temperature * std::pow(config.temperature_decay, static_cast<double>(iteration));
}

SpinConfiguration propose(const SolverConfig& config, const SpinConfiguration& spins, std::size_t iteration,
                          std::mt19937_64& rng) {
  const std::size_t n = spins.size();
  const std::size_t k = flips_for_iteration(config, n, iteration);
  SpinConfiguration candidate = spins;
  // Floyd's subset sampling: k draws, uniform over all k-subsets.
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(2 * k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    candidate.flip(pick);
  }
  return candidate;
}

ExactFastEvaluator::ExactFastEvaluator(AmplitudeSet problem) : problem_(std::move(problem)) {}

double ExactFastEvaluator::evaluate(const SpinConfiguration& spins, std::uint64_t) {
  const double s = effective_spin_sum(spins, problem_);
  return s * s;
}

namespace {

CorrelationKernel calibrated_kernel(const LatticeShape& shape, const OpticsParams& optics, const DetectorGrid& grid,
                                    const NoiseModel& noise) {
  CorrelationKernel kernel = synthesize_kernel(CouplingSpec::uniform_antiferromagnetic(), shape, grid);
  const DetectorFrame reference =
      far_field_intensity(uniform_mask(shape), optics, grid, FieldMode::Physical, noise, kCalibrationFrame);
  return align_kernel(kernel, calibrate_origin(reference));
}

}  // namespace

OpticalEvaluator::OpticalEvaluator(AmplitudeSet problem, FieldMode mode, const OpticsParams& optics,
                                   std::size_t detector_samples, NoiseModel noise)
    : problem_(std::move(problem)),
      mode_(mode),
      optics_(optics),
      grid_(DetectorGrid::for_lattice(problem_.shape(), optics, detector_samples)),
      noise_(noise),
      kernel_(calibrated_kernel(problem_.shape(), optics_, grid_, noise_)) {}

DetectorFrame OpticalEvaluator::render(const SpinConfiguration& spins, std::uint64_t frame_index) const {
  const GaugeField gauge = gauge_transform(spins, problem_);
  DetectorFrame frame =
      far_field_intensity(encode_phase(gauge, spins), optics_, grid_, mode_, noise_, frame_index);
  frame.origin_offset = kernel_.origin_offset;
  return frame;
}

double OpticalEvaluator::evaluate(const SpinConfiguration& spins, std::uint64_t frame_index) {
  return hamiltonian_from_frame(render(spins, frame_index), kernel_);
}

std::unique_ptr<Evaluator> make_evaluator(const AmplitudeSet& problem, const SolverConfig& config) {
  switch (config.backend) {
    case Backend::ExactFast: return std::make_unique<ExactFastEvaluator>(problem);
    case Backend::OpticalIdeal:
      return std::make_unique<OpticalEvaluator>(problem, FieldMode::Ideal, config.optics, config.detector_samples,
                                                config.noise);
    case Backend::OpticalPhysical:
      return std::make_unique<OpticalEvaluator>(problem, FieldMode::Physical, config.optics,
                                                config.detector_samples, config.noise);
  }
  throw ConfigError("unknown backend");
}

Solver::Solver(AmplitudeSet problem, SolverConfig config)
    : Solver(problem, config, (config.validate(), make_evaluator(problem, config))) {}

Solver::Solver(AmplitudeSet problem, SolverConfig config, std::unique_ptr<Evaluator> evaluator)
    : problem_(std::move(problem)),
      config_(std::move(config)),
      evaluator_(std::move(evaluator)),
      proposal_rng_(detail::mix_seed(config_.rng_seed, kProposalStream)),
      acceptance_rng_(detail::mix_seed(config_.rng_seed, kAcceptanceStream)),
      spins_(config_.initial_state.value_or(SpinConfiguration::all_up(problem_.shape()))),
      hamiltonian_(0.0),
      best_spins_(spins_),
      best_hamiltonian_(0.0) {
  config_.validate();
  require_same_shape(spins_.shape(), problem_.shape(), "solver initial state");
  hamiltonian_ = evaluator_->evaluate(spins_, 0);
  best_hamiltonian_ = hamiltonian_;
}

TrajectoryRecord Solver::initial_record() const {
  return TrajectoryRecord{0, hamiltonian_, magnetization(spins_, problem_), false, 0, 0.0};
}

TrajectoryRecord Solver::step() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t t = iteration_;
  SpinConfiguration candidate = propose(config_, spins_, t, proposal_rng_);
  const double h_candidate = evaluator_->evaluate(candidate, t + 1);
  if (config_.remeasure_current) hamiltonian_ = evaluator_->evaluate(spins_, kRemeasureFrameBase + t);

  const double n = static_cast<double>(problem_.size());
  const double excess = (h_candidate - hamiltonian_) + config_.accept_margin * n * n;
  const double temperature = temperature_at(config_, t);
  bool accept = excess < 0.0;
  if (!accept && temperature > 0.0) {
    accept = excess == 0.0 ||
             std::uniform_real_distribution<double>(0.0, 1.0)(acceptance_rng_) < std::exp(-excess / temperature);
  }

  if (accept) {
    spins_ = std::move(candidate);
    hamiltonian_ = h_candidate;
    if (hamiltonian_ < best_hamiltonian_) {
      best_hamiltonian_ = hamiltonian_;
      best_spins_ = spins_;
    }
  }
  ++iteration_;

  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
  return TrajectoryRecord{iteration_, hamiltonian_, magnetization(spins_, problem_), accept,
                          flips_for_iteration(config_, problem_.size(), t), elapsed.count()};
}

RunResult Solver::run() {
  RunResult result{{}, spins_, best_spins_, best_hamiltonian_};
  result.trajectory.reserve(config_.max_iterations + 1);
  result.trajectory.push_back(initial_record());
  while (iteration_ < config_.max_iterations) result.trajectory.push_back(step());
  result.final_spins = spins_;
  result.best_spins = best_spins_;
  result.best_hamiltonian = best_hamiltonian_;
  return result;
}

RunResult run(const AmplitudeSet& problem, const SolverConfig& config) { return Solver(problem, config).run(); }

}  // namespace spim
