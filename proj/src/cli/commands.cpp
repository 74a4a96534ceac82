#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "io_util.hpp"
#include "rng.hpp"
#include "spim/cli.hpp"
#include "spim/correlation.hpp"
#include "spim/grid_io.hpp"
#include "spim/problems.hpp"

namespace spim::cli {
namespace {

using nlohmann::json;

// Load-phase failures are usage errors (exit 2); anything after is runtime (exit 1).
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

template <typename F>
auto load_phase(F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& rows, bool timing) {
  std::string text = "iteration,H,m_abs,accepted,flips,wall_ms\n";
  for (const auto& r : rows) {
    text += std::to_string(r.iteration) + "," + detail::format_double(r.hamiltonian) + "," +
            detail::format_double(r.magnetization) + "," + (r.accepted ? "1" : "0") + "," + std::to_string(r.flips) +
            "," + detail::format_double(timing ? r.wall_ms : 0.0) + "\n";
  }
  return text;
}

json state_json(const SpinConfiguration& spins, const AmplitudeSet& amps) {
  const PartitionSummary s = summarize(spins, amps);
  const double sum = effective_spin_sum(spins, amps);
  return json{{"hamiltonian_exact", sum * sum},
              {"m_abs", magnetization(spins, amps)},
              {"difference", s.difference},
              {"fidelity", s.fidelity}};
}

std::string trial_dir_name(std::size_t trial) {
  std::ostringstream name;
  name << "trial_" << std::setw(2) << std::setfill('0') << trial;
  return name.str();
}

AmplitudeSet load_instance(const ExperimentConfig& config, std::uint64_t& seed_out) {
  if (config.instance_file) {
    InstanceFile file = read_instance(*config.instance_file);
    seed_out = file.seed;
    return std::move(file.amps);
  }
  seed_out = *config.instance_seed;
  return generate_instance(config.lattice, *config.instance_seed);
}

// Trial t of an experiment: solver seed base + t, noise stream derived from it.
SolverConfig trial_solver_config(const SolverConfig& base, std::uint64_t solver_seed) {
  SolverConfig cfg = base;
  cfg.rng_seed = solver_seed;
  cfg.noise.rng_seed = detail::mix_seed(base.noise.rng_seed, solver_seed);
  return cfg;
}

template <typename F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

int cmd_solve(const std::filesystem::path& config_path, const GlobalOptions& globals, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    std::uint64_t instance_seed = 0;
    ExperimentConfig config = load_phase([&] { return load_experiment(config_path, globals); });
    const AmplitudeSet amps = load_phase([&] { return load_instance(config, instance_seed); });

    std::filesystem::create_directories(config.output_dir);
    json summary;
    summary["backend"] = std::string(backend_name(config.solver.backend));
    summary["n_x"] = amps.shape().n_x();
    summary["n_y"] = amps.shape().n_y();
    summary["instance_seed"] = instance_seed;
    summary["trials"] = json::array();
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t solver_seed = config.solver.rng_seed + trial;
      const RunResult result = run(amps, trial_solver_config(config.solver, solver_seed));

      const auto dir = config.output_dir / trial_dir_name(trial);
      std::filesystem::create_directories(dir);
      detail::write_file_atomic(dir / "trajectory.csv", trajectory_csv(result.trajectory, globals.timing));
      write_partition(dir / "partition.txt", result.final_spins, instance_seed);
      write_partition(dir / "best_partition.txt", result.best_spins, instance_seed);

      json row{{"trial", trial},
               {"seed", solver_seed},
               {"iterations", result.trajectory.back().iteration},
               {"final_hamiltonian", result.trajectory.back().hamiltonian},
               {"final", state_json(result.final_spins, amps)},
               {"best_hamiltonian", result.best_hamiltonian},
               {"best", state_json(result.best_spins, amps)}};
      out << "trial " << trial << ": |m'| = " << row["final"]["m_abs"].get<double>()
          << ", fidelity = " << row["final"]["fidelity"].get<double>() << "\n";
      summary["trials"].push_back(std::move(row));
    }
    detail::write_file_atomic(config.output_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  });
}

namespace {

CouplingTable read_table_file(const std::filesystem::path& path, const LatticeShape& shape) {
  std::istringstream in(detail::read_file(path));
  CouplingTable table = CouplingTable::constant(shape, 0.0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    long kx = 0, ky = 0;
    std::string value;
    if (!(fields >> kx >> ky >> value)) throw ConfigError("bad line in " + path.string() + ": '" + line + "'");
    if (std::abs(kx) > table.kx_max() || std::abs(ky) > table.ky_max()) {
      throw ConfigError("k = (" + std::to_string(kx) + ", " + std::to_string(ky) + ") outside the difference set");
    }
    table.at(kx, ky) = detail::parse_double(value, path);
  }
  return table;
}

}  // namespace

int cmd_synth_kernel(const SynthKernelOptions& options, const GlobalOptions& globals, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto [shape, spec, grid] = load_phase([&] {
      if (options.n_x == 0 || options.n_y == 0) throw ConfigError("--nx and --ny must be positive");
      LatticeShape shape(options.n_x, options.n_y);
      CouplingSpec spec;
      if (options.target == "uniform") {
        spec = CouplingSpec::uniform_antiferromagnetic(options.strength);
      } else if (options.target == "zero") {
        spec = CouplingSpec::table(CouplingTable::constant(shape, 0.0));
      } else if (options.target == "table") {
        if (!options.table_file) throw ConfigError("--target table needs --table");
        spec = CouplingSpec::table(read_table_file(*options.table_file, shape));
      } else {
        throw ConfigError("unknown target '" + options.target + "'");
      }
      spec.materialize(shape);
      DetectorGrid grid = DetectorGrid::for_lattice(shape, options.optics, options.samples);
      return std::tuple{shape, spec, grid};
    });

    const CorrelationKernel kernel = synthesize_kernel(spec, shape, grid);
    const CouplingTable target = spec.materialize(shape);
    const RealizedCoupling realized = realized_coupling(kernel, shape);

    // Linearity: the kernel for 2G must be exactly twice the kernel for G.
    const CorrelationKernel doubled = synthesize_kernel(CouplingSpec::table(target.scaled(2.0)), shape, grid);
    double linearity = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < kernel.weights.size(); ++i) {
      linearity = std::max(linearity, std::abs(doubled.weights[i] - 2.0 * kernel.weights[i]));
      scale = std::max(scale, std::abs(kernel.weights[i]));
    }
    const auto [lo, hi] = std::minmax_element(kernel.weights.begin(), kernel.weights.end());

    std::filesystem::path path = globals.out ? *globals.out : options.kernel_out;
    save_kernel(path, kernel);
    json report{{"kernel_file", path.string()},
                {"n_x", shape.n_x()},
                {"n_y", shape.n_y()},
                {"samples_per_axis", grid.size()},
                {"pixel_pitch", grid.pixel_pitch()},
                {"max_abs_realized_error", realized.max_abs_error(target)},
                {"linearity_max_rel_deviation", scale > 0.0 ? linearity / scale : linearity},
                {"min_weight", *lo},
                {"max_weight", *hi},
                {"sign_indefinite", *lo < 0.0 && *hi > 0.0}};
    out << report.dump(2) << "\n";
    return kExitOk;
  });
}

int cmd_bench(const std::filesystem::path& config_path, const std::optional<std::vector<std::size_t>>& sizes,
              const GlobalOptions& globals, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config = load_phase([&] {
      ExperimentConfig c = load_experiment(config_path, globals);
      if (sizes) c.bench.sizes = *sizes;
      if (c.bench.sizes.empty()) throw ConfigError("bench: empty list of sizes");
      for (std::size_t n : c.bench.sizes) {
        const LatticeShape shape = lattice_for(n);
        if (c.solver.backend != Backend::ExactFast) {
          DetectorGrid::for_lattice(shape, c.solver.optics, c.solver.detector_samples);
        }
      }
      return c;
    });
    const std::uint64_t instance_base = config.instance_seed.value_or(1);
    const std::uint64_t solver_base = config.solver.rng_seed;
    const bool vary_instance = config.bench.vary != "solver";
    const bool vary_solver = config.bench.vary != "instance";

    struct Trial {
      std::size_t n;
      std::size_t index;
      std::uint64_t instance_seed;
      std::uint64_t solver_seed;
      double fidelity = 0.0;
      double m_abs = 0.0;
      double best_fidelity = 0.0;
      double greedy_fidelity = 0.0;
    };
    std::vector<Trial> trials;
    for (std::size_t n : config.bench.sizes) {
      for (std::size_t t = 0; t < config.bench.trials; ++t) {
        trials.push_back(Trial{n, t, instance_base + (vary_instance ? t : 0), solver_base + (vary_solver ? t : 0)});
      }
    }

    parallel_for(trials.size(), config.bench.threads, [&](std::size_t i) {
      Trial& trial = trials[i];
      const AmplitudeSet amps = generate_instance(lattice_for(trial.n), trial.instance_seed);
      const RunResult result = run(amps, trial_solver_config(config.solver, trial.solver_seed));
      trial.fidelity = summarize(result.final_spins, amps).fidelity;
      trial.m_abs = magnetization(result.final_spins, amps);
      trial.best_fidelity = summarize(result.best_spins, amps).fidelity;
      trial.greedy_fidelity = summarize(greedy_baseline(amps), amps).fidelity;
    });

    std::filesystem::create_directories(config.output_dir);
    std::string per_trial = "N,trial,instance_seed,solver_seed,fidelity,m_abs,best_fidelity,greedy_fidelity\n";
    for (const Trial& t : trials) {
      per_trial += std::to_string(t.n) + "," + std::to_string(t.index) + "," + std::to_string(t.instance_seed) + "," +
                   std::to_string(t.solver_seed) + "," + detail::format_double(t.fidelity) + "," +
                   detail::format_double(t.m_abs) + "," + detail::format_double(t.best_fidelity) + "," +
                   detail::format_double(t.greedy_fidelity) + "\n";
    }
    std::string table = "N,n_x,n_y,trials,mean_fidelity,min_fidelity,max_fidelity,mean_m_abs,mean_greedy_fidelity\n";
    for (std::size_t n : config.bench.sizes) {
      double sum = 0.0, lo = 1.0, hi = 0.0, m_sum = 0.0, greedy = 0.0;
      std::size_t count = 0;
      for (const Trial& t : trials) {
        if (t.n != n) continue;
        sum += t.fidelity;
        lo = std::min(lo, t.fidelity);
        hi = std::max(hi, t.fidelity);
        m_sum += t.m_abs;
        greedy += t.greedy_fidelity;
        ++count;
      }
      const LatticeShape shape = lattice_for(n);
      const double c = static_cast<double>(count);
      table += std::to_string(n) + "," + std::to_string(shape.n_x()) + "," + std::to_string(shape.n_y()) + "," +
               std::to_string(count) + "," + detail::format_double(sum / c) + "," + detail::format_double(lo) + "," +
               detail::format_double(hi) + "," + detail::format_double(m_sum / c) + "," +
               detail::format_double(greedy / c) + "\n";
    }
    detail::write_file_atomic(config.output_dir / "bench_trials.csv", per_trial);
    detail::write_file_atomic(config.output_dir / "bench.csv", table);
    out << table;
    return kExitOk;
  });
}

int cmd_calibrate(const std::filesystem::path& frame_path, const GlobalOptions& globals, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const DetectorFrame frame = load_phase([&] { return load_frame(frame_path); });
    const OriginOffset origin = calibrate_origin(frame);
    json report{{"du", origin.du},
                {"dv", origin.dv},
                {"du_m", origin.du * frame.grid.pixel_pitch()},
                {"dv_m", origin.dv * frame.grid.pixel_pitch()},
                {"samples_per_axis", frame.grid.size()}};
    if (globals.out) detail::write_file_atomic(*globals.out, report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return kExitOk;
  });
}

int cmd_oracle(const OracleOptions& options, const GlobalOptions& globals, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::uint64_t seed = globals.seed.value_or(1);
    const AmplitudeSet amps = load_phase([&] {
      if (options.instance_file) {
        InstanceFile file = read_instance(*options.instance_file);
        seed = file.seed;
        return std::move(file.amps);
      }
      return generate_instance(LatticeShape(options.n_x, options.n_y), seed);
    });
    if (amps.size() > kBruteForceLimit) {
      throw ConfigError("oracle: N = " + std::to_string(amps.size()) + " exceeds the brute-force limit of " +
                        std::to_string(kBruteForceLimit));
    }
    const OptimalPartition best = brute_force_optimum(amps);
    const PartitionSummary greedy = summarize(greedy_baseline(amps), amps);
    json report{{"n", amps.size()},
                {"instance_seed", seed},
                {"optimal_difference", best.difference},
                {"optimal_fidelity", summarize(best.spins, amps).fidelity},
                {"greedy_difference", greedy.difference},
                {"greedy_fidelity", greedy.fidelity}};
    if (globals.out) write_partition(*globals.out, best.spins, seed);
    out << report.dump(2) << "\n";
    return kExitOk;
  });
}

int cmd_render_frame(const RenderFrameOptions& options, const GlobalOptions& globals, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto [mask, grid, mode, noise] = load_phase([&] {
      FieldMode mode = FieldMode::Physical;
      if (options.mode == "ideal") {
        mode = FieldMode::Ideal;
      } else if (options.mode != "physical") {
        throw ConfigError("--mode must be 'physical' or 'ideal'");
      }
      NoiseModel noise = options.noise;
      if (globals.seed) noise.rng_seed = *globals.seed;
      noise.validate();
      PhaseMask mask = uniform_mask(LatticeShape(options.n_x, options.n_y));
      if (options.partition_file) {
        const SpinConfiguration spins = read_partition(*options.partition_file);
        const AmplitudeSet amps = options.instance_file
                                      ? read_instance(*options.instance_file).amps
                                      : AmplitudeSet(spins.shape(), std::vector<double>(spins.size(), 1.0));
        mask = encode_phase(gauge_transform(spins, amps), spins);
      }
      const OpticsParams optics;
      DetectorGrid grid = DetectorGrid::for_lattice(mask.shape, optics, options.samples);
      mask = apply_phase_ramp(mask, grid, OriginOffset{options.shift_u, options.shift_v});
      return std::tuple{mask, grid, mode, noise};
    });
    const DetectorFrame frame = far_field_intensity(mask, OpticsParams{}, grid, mode, noise);
    const std::filesystem::path path = globals.out ? *globals.out : options.frame_out;
    save_frame(path, frame);
    out << "wrote " << path.string() << " (" << grid.size() << "x" << grid.size() << ")\n";
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial photonic Ising machine simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions globals;
  std::uint64_t seed = 0;
  std::string backend;
  std::string out_path;
  bool no_timing = false;
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (solver seed, or instance seed for oracle)");
  auto* backend_opt = app.add_option("--backend", backend, "exact-fast | optical-ideal | optical-physical");
  auto* out_opt = app.add_option("--out", out_path, "Output directory or file, depending on the command");
  app.add_flag("--no-timing", no_timing, "Write wall_ms = 0 so reruns are byte-identical");

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Run the search loop for every trial in a config");
  solve->add_option("config", config_path, "Experiment config (JSON)")->required();

  SynthKernelOptions synth;
  auto* synth_cmd = app.add_subcommand("synth-kernel", "Synthesize a correlation kernel and check it");
  synth_cmd->add_option("--nx", synth.n_x)->required();
  synth_cmd->add_option("--ny", synth.n_y)->required();
  synth_cmd->add_option("--target", synth.target, "uniform | zero | table");
  synth_cmd->add_option("--strength", synth.strength, "Uniform coupling strength (negative)");
  std::string table_path;
  auto* table_opt = synth_cmd->add_option("--table", table_path, "Table file with lines 'kx ky G'");
  synth_cmd->add_option("--samples", synth.samples, "Detector samples per axis (odd; 0 = default)");
  synth_cmd->add_option("--kernel", synth.kernel_out, "Kernel output file (overridden by --out)");

  std::string bench_config;
  std::vector<std::size_t> bench_sizes;
  auto* bench = app.add_subcommand("bench", "Fidelity versus N sweep");
  bench->add_option("config", bench_config, "Experiment config (JSON)")->required();
  auto* sizes_opt = bench->add_option("--sizes", bench_sizes, "Comma-separated list of N")->delimiter(',');

  std::string frame_path;
  auto* calibrate = app.add_subcommand("calibrate", "Locate the optical axis on a uniform-mask frame");
  calibrate->add_option("frame", frame_path, "Frame grid file")->required();

  OracleOptions oracle;
  std::string oracle_instance;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact brute-force partition for N <= 24");
  auto* oracle_instance_opt = oracle_cmd->add_option("--instance", oracle_instance, "Instance file");
  oracle_cmd->add_option("--nx", oracle.n_x);
  oracle_cmd->add_option("--ny", oracle.n_y);

  RenderFrameOptions render;
  std::string render_instance, render_partition;
  int bits = 0;
  double photons = 0.0;
  auto* render_cmd = app.add_subcommand("render-frame", "Write a simulated detector frame");
  render_cmd->add_option("--nx", render.n_x);
  render_cmd->add_option("--ny", render.n_y);
  auto* render_instance_opt = render_cmd->add_option("--instance", render_instance, "Instance file");
  auto* render_partition_opt = render_cmd->add_option("--partition", render_partition, "Partition file");
  render_cmd->add_option("--mode", render.mode, "physical | ideal");
  render_cmd->add_option("--shift-u", render.shift_u, "Injected origin shift in pixels");
  render_cmd->add_option("--shift-v", render.shift_v, "Injected origin shift in pixels");
  render_cmd->add_option("--samples", render.samples);
  render_cmd->add_option("--read-noise", render.noise.read_noise_sigma);
  auto* bits_opt = render_cmd->add_option("--bits", bits);
  auto* photons_opt = render_cmd->add_option("--photons", photons);
  render_cmd->add_option("--frame", render.frame_out, "Frame output file (overridden by --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (*seed_opt) globals.seed = seed;
  if (*backend_opt) globals.backend = backend;
  if (*out_opt) globals.out = out_path;
  globals.timing = !no_timing;

  if (*solve) return cmd_solve(config_path, globals, out, err);
  if (*synth_cmd) {
    if (*table_opt) synth.table_file = table_path;
    return cmd_synth_kernel(synth, globals, out, err);
  }
  if (*bench) {
    std::optional<std::vector<std::size_t>> sizes;
    if (*sizes_opt) sizes = bench_sizes;
    return cmd_bench(bench_config, sizes, globals, out, err);
  }
  if (*calibrate) return cmd_calibrate(frame_path, globals, out, err);
  if (*oracle_cmd) {
    if (*oracle_instance_opt) oracle.instance_file = oracle_instance;
    return cmd_oracle(oracle, globals, out, err);
  }
  if (*render_cmd) {
    if (*render_instance_opt) render.instance_file = render_instance;
    if (*render_partition_opt) render.partition_file = render_partition;
    if (*bits_opt) render.noise.quantization_bits = bits;
    if (*photons_opt) render.noise.photon_budget = photons;
    return cmd_render_frame(render, globals, out, err);
  }
  return kExitUsage;
}

}  // namespace spim::cli
