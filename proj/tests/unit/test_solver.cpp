#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "oracles.hpp"
#include "spim/problems.hpp"
#include "spim/solver.hpp"

namespace spim {
namespace {

// Returns queued values in order; the first is consumed by the initial state.
class ScriptedEvaluator final : public Evaluator {
public:
  explicit ScriptedEvaluator(std::deque<double> values) : values_(std::move(values)) {}
  double evaluate(const SpinConfiguration&, std::uint64_t) override {
    const double v = values_.front();
    values_.pop_front();
    return v;
  }

private:
  std::deque<double> values_;
};

std::size_t hamming(const SpinConfiguration& a, const SpinConfiguration& b) {
  std::size_t d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) d += a[j] != b[j];
  return d;
}

TEST(Schedule, FlipCounts) {
  SolverConfig c;
  EXPECT_EQ(flips_for_iteration(c, 40000, 0), 2000u);
  EXPECT_EQ(flips_for_iteration(c, 40000, 1), 1960u);
  EXPECT_EQ(flips_for_iteration(c, 16, 0), 1u);        // 0.8 rounds to 1
  EXPECT_EQ(flips_for_iteration(c, 40000, 5000), 1u);  // floor
  c.flip_fraction = 1.0;
  c.flip_decay = 1.0;
  EXPECT_EQ(flips_for_iteration(c, 7, 100), 7u);
  EXPECT_EQ(temperature_at(c, 10), 0.0);
  c.initial_temperature = 2.0;
  c.temperature_decay = 0.5;
  EXPECT_DOUBLE_EQ(temperature_at(c, 3), 0.25);
}

TEST(SolverConfig, ValidateRejectsBadValues) {
  const auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](SolverConfig& c) { c.max_iterations = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.flip_fraction = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.flip_fraction = 1.5; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.flip_decay = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.initial_temperature = -1.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.noise.read_noise_sigma = -0.1; }).validate(), ConfigError);
  EXPECT_NO_THROW(SolverConfig{}.validate());
  EXPECT_EQ(parse_backend("optical-ideal"), Backend::OpticalIdeal);
  EXPECT_EQ(backend_name(Backend::ExactFast), "exact-fast");
  EXPECT_THROW(parse_backend("optical"), ConfigError);
}

TEST(Propose, FlipsExactlyTheScheduledNumberAndLeavesInputAlone) {
  const LatticeShape shape(200, 200);
  const auto spins = SpinConfiguration::all_up(shape);
  SolverConfig c;
  std::mt19937_64 a(5), b(5);
  const auto p1 = propose(c, spins, 0, a);
  const auto p2 = propose(c, spins, 0, b);
  EXPECT_EQ(hamming(p1, spins), 2000u);
  EXPECT_TRUE(std::equal(p1.values().begin(), p1.values().end(), p2.values().begin()));
  for (auto s : spins.values()) EXPECT_EQ(s, 1);
  EXPECT_EQ(hamming(propose(c, spins, 10000, a), spins), 1u);
}

TEST(Propose, SubsetsAreUniform) {
  const LatticeShape shape(10, 1);
  SolverConfig c;
  c.flip_fraction = 0.3;
  c.flip_decay = 1.0;
  std::mt19937_64 rng(3);
  std::vector<int> counts(10, 0);
  const auto spins = SpinConfiguration::all_up(shape);
  constexpr int kDraws = 30000;
  for (int i = 0; i < kDraws; ++i) {
    const auto p = propose(c, spins, 0, rng);
    for (std::size_t j = 0; j < 10; ++j) counts[j] += p[j] < 0;
  }
  // each index flipped with probability 3/10; binomial sd ~ 79
  for (int n : counts) EXPECT_NEAR(n, 0.3 * kDraws, 400);
}

TEST(Step, StrictDescentRejectsHigherAndAcceptsLower) {
  const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 1);
  SolverConfig c;
  c.accept_margin = 0.0;
  Solver solver(amps, c, std::make_unique<ScriptedEvaluator>(std::deque<double>{10.0, 12.0, 10.0, 7.0}));
  const auto initial = solver.spins();

  const auto r1 = solver.step();  // higher: rejected
  EXPECT_FALSE(r1.accepted);
  EXPECT_EQ(r1.hamiltonian, 10.0);
  EXPECT_EQ(hamming(solver.spins(), initial), 0u);

  const auto r2 = solver.step();  // tie: rejected at T = 0
  EXPECT_FALSE(r2.accepted);

  const auto r3 = solver.step();  // lower: accepted
  EXPECT_TRUE(r3.accepted);
  EXPECT_EQ(r3.hamiltonian, 7.0);
  EXPECT_EQ(solver.best_hamiltonian(), 7.0);
  EXPECT_EQ(hamming(solver.spins(), initial), 1u);
  EXPECT_EQ(r3.iteration, 3u);
}

TEST(Step, MarginGuardsAgainstRoundOff) {
  const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 1);
  SolverConfig c;  // margin 1e-9 * 256
  Solver solver(amps, c, std::make_unique<ScriptedEvaluator>(std::deque<double>{10.0, 10.0 - 1e-8, 10.0 - 1e-6}));
  EXPECT_FALSE(solver.step().accepted);
  EXPECT_TRUE(solver.step().accepted);
}

TEST(Step, PositiveTemperatureAcceptsTiesAndSomeUphillMoves) {
  const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 1);
  SolverConfig c;
  c.accept_margin = 0.0;
  c.initial_temperature = 1.0;
  c.temperature_decay = 1.0;
  std::deque<double> script{5.0, 5.0};
  for (int i = 0; i < 50; ++i) script.push_back(6.0);  // uphill by 1, accepted with p = exp(-1)
  Solver solver(amps, c, std::make_unique<ScriptedEvaluator>(script));
  EXPECT_TRUE(solver.step().accepted);  // tie
  bool any = false;
  for (int i = 0; i < 50 && !any; ++i) any = solver.step().accepted;
  EXPECT_TRUE(any);
}

TEST(Step, RemeasuredCurrentValueIsCompared) {
  const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 1);
  SolverConfig c;
  c.accept_margin = 0.0;
  c.remeasure_current = true;
  // candidate first, then the fresh frame of the retained state
  Solver solver(amps, c, std::make_unique<ScriptedEvaluator>(std::deque<double>{10.0, 9.0, 8.0, 9.0, 12.0}));
  const auto r1 = solver.step();
  EXPECT_FALSE(r1.accepted);
  EXPECT_EQ(r1.hamiltonian, 8.0);
  const auto r2 = solver.step();
  EXPECT_TRUE(r2.accepted);
  EXPECT_EQ(r2.hamiltonian, 9.0);
}

TEST(Run, TrajectoryShapeAndIdentities) {
  const AmplitudeSet amps = generate_instance(LatticeShape(20, 20), 7);
  SolverConfig c;
  c.max_iterations = 300;
  c.rng_seed = 3;
  const RunResult r = run(amps, c);
  ASSERT_EQ(r.trajectory.size(), 301u);
  EXPECT_EQ(r.trajectory[0].iteration, 0u);
  EXPECT_NEAR(r.trajectory[0].magnetization, amps.total() / 400.0, 1e-15);
  double previous = r.trajectory[0].hamiltonian;
  for (const auto& rec : r.trajectory) {
    EXPECT_LE(rec.hamiltonian, previous);  // strict descent, noiseless
    previous = rec.hamiltonian;
    const double nm = 400.0 * rec.magnetization;
    EXPECT_NEAR(rec.hamiltonian, nm * nm, 1e-9 * std::max(1.0, rec.hamiltonian));
  }
  EXPECT_LE(r.best_hamiltonian, r.trajectory[0].hamiltonian);
  EXPECT_EQ(r.best_hamiltonian, r.trajectory.back().hamiltonian);
  EXPECT_NEAR(exact_hamiltonian_uniform(gauge_transform(r.final_spins, amps)), r.trajectory.back().hamiltonian,
              1e-9 * std::max(1.0, r.best_hamiltonian));
}

TEST(Run, BestSoFarNeverExceedsInitialUnderNoiseAndTemperature) {
  const AmplitudeSet amps = generate_instance(LatticeShape(8, 8), 2);
  SolverConfig c;
  c.max_iterations = 100;
  c.backend = Backend::OpticalPhysical;
  c.noise.read_noise_sigma = 0.05;
  c.noise.quantization_bits = 6;
  c.initial_temperature = 50.0;
  const RunResult r = run(amps, c);
  EXPECT_LE(r.best_hamiltonian, r.trajectory[0].hamiltonian);
  for (const auto& rec : r.trajectory) EXPECT_GE(rec.hamiltonian, r.best_hamiltonian);
}

TEST(Run, InitialStateIsConfigurable) {
  const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 2);
  SolverConfig c;
  c.max_iterations = 1;
  std::vector<std::int8_t> s(16, -1);
  c.initial_state = SpinConfiguration(LatticeShape(4, 4), s);
  Solver solver(amps, c);
  EXPECT_EQ(solver.spins()[0], -1);
  c.initial_state = SpinConfiguration::all_up(LatticeShape(2, 2));
  EXPECT_THROW(Solver(amps, c), DimensionError);
}

// All-equal amplitudes: every balanced configuration has H = 0 exactly.
TEST(Run, EqualAmplitudeInstanceReachesExactZero) {
  const LatticeShape shape(10, 10);
  const AmplitudeSet amps(shape, std::vector<double>(100, 0.5));
  SolverConfig c;
  c.rng_seed = 11;
  const RunResult r = run(amps, c);
  EXPECT_EQ(r.best_hamiltonian, 0.0);
  EXPECT_EQ(summarize(r.best_spins, amps).difference, 0.0);
}

TEST(Run, ParityInstanceReachesExactZero) {
  const auto [amps, ground] = generate_parity_instance(LatticeShape(4, 4), 8);
  SolverConfig c;
  c.max_iterations = 100000;
  c.accept_margin = 0.0;
  c.flip_fraction = 3.0 / 16.0;
  c.flip_decay = 1.0;
  c.initial_temperature = 1.0;
  c.temperature_decay = 1.0;
  EXPECT_EQ(run(amps, c).best_hamiltonian, 0.0);
}

// Given enough evaluations the Metropolis walk finds the exhaustive optimum.
TEST(Run, LongRunsReachTheBruteForceOptimum) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AmplitudeSet amps = generate_instance(LatticeShape(4, 4), 100 + seed);
    SolverConfig c;
    c.max_iterations = 100000;
    c.accept_margin = 0.0;
    c.flip_fraction = 3.0 / 16.0;
    c.flip_decay = 1.0;
    c.initial_temperature = 1.0;
    c.temperature_decay = 1.0;
    c.rng_seed = seed;
    const RunResult r = run(amps, c);
    const double best = summarize(r.best_spins, amps).difference;
    const double oracle = brute_force_optimum(amps).difference;
    EXPECT_GE(best + 1e-12, oracle);
    hits += best <= oracle + 1e-12;
  }
  EXPECT_GE(hits, 9);
}

// Same seed and instance: identical accept/reject sequences for the exact and
// the noiseless ideal optical backend.
TEST(Run, BackendAgreement) {
  for (std::size_t n : {8u, 16u, 32u}) {
    const AmplitudeSet amps = generate_instance(LatticeShape(n, n), 40 + n);
    SolverConfig c;
    c.max_iterations = 150;
    c.rng_seed = n;
    const RunResult exact = run(amps, c);
    c.backend = Backend::OpticalIdeal;
    const RunResult optical = run(amps, c);
    ASSERT_EQ(exact.trajectory.size(), optical.trajectory.size());
    for (std::size_t i = 0; i < exact.trajectory.size(); ++i) {
      const auto& a = exact.trajectory[i];
      const auto& b = optical.trajectory[i];
      ASSERT_EQ(a.accepted, b.accepted) << n << " @" << i;
      ASSERT_EQ(a.flips, b.flips);
      ASSERT_NEAR(b.hamiltonian, a.hamiltonian, 1e-6 * std::max(1.0, a.hamiltonian)) << n << " @" << i;
    }
  }
}

TEST(Run, DeterministicForEveryBackend) {
  const AmplitudeSet amps = generate_instance(LatticeShape(8, 8), 9);
  for (Backend backend : {Backend::ExactFast, Backend::OpticalIdeal, Backend::OpticalPhysical}) {
    SolverConfig c;
    c.max_iterations = 60;
    c.backend = backend;
    c.rng_seed = 77;
    c.noise.read_noise_sigma = 0.01;
    c.noise.quantization_bits = 8;
    c.noise.photon_budget = 1e5;
    c.initial_temperature = 1.0;
    const RunResult a = run(amps, c);
    const RunResult b = run(amps, c);
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
      ASSERT_EQ(a.trajectory[i].hamiltonian, b.trajectory[i].hamiltonian);
      ASSERT_EQ(a.trajectory[i].accepted, b.trajectory[i].accepted);
      ASSERT_EQ(a.trajectory[i].magnetization, b.trajectory[i].magnetization);
    }
    c.rng_seed = 78;
    const RunResult other = run(amps, c);
    bool differs = false;
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) differs |= a.trajectory[i].hamiltonian != other.trajectory[i].hamiltonian;
    EXPECT_TRUE(differs) << backend_name(backend);
  }
}

TEST(Run, RemeasuringIsANoOpWithoutNoise) {
  const AmplitudeSet amps = generate_instance(LatticeShape(12, 12), 5);
  for (Backend backend : {Backend::ExactFast, Backend::OpticalIdeal}) {
    SolverConfig c;
    c.max_iterations = 100;
    c.backend = backend;
    const RunResult a = run(amps, c);
    c.remeasure_current = true;
    const RunResult b = run(amps, c);
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
      ASSERT_EQ(a.trajectory[i].hamiltonian, b.trajectory[i].hamiltonian) << backend_name(backend) << " @" << i;
      ASSERT_EQ(a.trajectory[i].accepted, b.trajectory[i].accepted);
    }
  }
}

TEST(Run, RemeasuringUnderNoiseKeepsAcceptingAfterConvergence) {
  const AmplitudeSet amps = generate_instance(LatticeShape(20, 20), 6);
  SolverConfig c;
  c.max_iterations = 600;
  c.backend = Backend::OpticalIdeal;
  c.noise.read_noise_sigma = 0.01;
  c.noise.quantization_bits = 8;
  c.noise.auto_exposure = true;
  const auto late_accepts = [&] {
    const RunResult r = run(amps, c);
    int n = 0;
    for (std::size_t i = 400; i < r.trajectory.size(); ++i) n += r.trajectory[i].accepted;
    return n;
  };
  const int stored = late_accepts();
  c.remeasure_current = true;
  const int fresh = late_accepts();
  EXPECT_GT(fresh, 10 * std::max(stored, 1)) << stored << " vs " << fresh;
}

TEST(OpticalEvaluator, CalibratesOriginAndMatchesExactOnIdealFrames) {
  std::mt19937_64 rng(6);
  const LatticeShape shape(12, 12);
  const AmplitudeSet amps = test::random_amplitudes(shape, rng);
  OpticalEvaluator eval(amps, FieldMode::Ideal, OpticsParams{}, 0, NoiseModel{});
  EXPECT_NEAR(eval.calibrated_origin().du, 0.0, 1e-6);
  EXPECT_NEAR(eval.calibrated_origin().dv, 0.0, 1e-6);
  const auto spins = test::random_spins(shape, rng);
  const double exact = exact_hamiltonian_uniform(gauge_transform(spins, amps));
  EXPECT_NEAR(eval.evaluate(spins, 1), exact, 1e-6 * std::max(1.0, exact));
}

}  // namespace
}  // namespace spim
