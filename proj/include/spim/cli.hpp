#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spim/core.hpp"
#include "spim/optics.hpp"
#include "spim/solver.hpp"

namespace spim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Command-line overrides that apply to every subcommand.
struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::filesystem::path> out;
  bool timing = true;  // false writes wall_ms = 0 so reruns are byte-identical
};

struct BenchSettings {
  std::vector<std::size_t> sizes{1600, 2500, 6400, 10000, 16900, 40000};
  std::size_t trials = 10;
  // Which seed changes between trials: "both", "instance" or "solver".
  std::string vary = "both";
  std::size_t threads = 0;  // 0 = hardware concurrency
};

// One JSON document fully describing an experiment. See configs/*.json.
struct ExperimentConfig {
  LatticeShape lattice{1, 1};
  std::optional<std::uint64_t> instance_seed;
  std::optional<std::filesystem::path> instance_file;
  SolverConfig solver;  // optics, detector samples and noise live here too
  std::filesystem::path output_dir = "out";
  std::size_t trials = 1;
  BenchSettings bench;
};

// Parse and validate. Unknown keys, bad values and unreadable files raise
// ConfigError. Relative paths resolve against the config file's directory.
ExperimentConfig load_experiment(const std::filesystem::path& path, const GlobalOptions& globals);
ExperimentConfig parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir,
                                  const GlobalOptions& globals);

// Rectangular lattice for N spins: the factorization n_x * n_y = N with
// n_x >= n_y closest to square.
LatticeShape lattice_for(std::size_t n);

// Each command returns an exit code and reports to `out` / `err`.
int cmd_solve(const std::filesystem::path& config_path, const GlobalOptions& globals, std::ostream& out,
              std::ostream& err);

struct SynthKernelOptions {
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::string target = "uniform";  // uniform | zero | table
  double strength = -1.0;
  std::optional<std::filesystem::path> table_file;  // lines "kx ky G"
  std::size_t samples = 0;
  OpticsParams optics;
  std::filesystem::path kernel_out = "kernel.grid";
};
int cmd_synth_kernel(const SynthKernelOptions& options, const GlobalOptions& globals, std::ostream& out,
                     std::ostream& err);

int cmd_bench(const std::filesystem::path& config_path, const std::optional<std::vector<std::size_t>>& sizes,
              const GlobalOptions& globals, std::ostream& out, std::ostream& err);

int cmd_calibrate(const std::filesystem::path& frame_path, const GlobalOptions& globals, std::ostream& out,
                  std::ostream& err);

struct OracleOptions {
  std::optional<std::filesystem::path> instance_file;
  std::size_t n_x = 4;
  std::size_t n_y = 4;
};
int cmd_oracle(const OracleOptions& options, const GlobalOptions& globals, std::ostream& out, std::ostream& err);

struct RenderFrameOptions {
  std::size_t n_x = 16;
  std::size_t n_y = 16;
  std::optional<std::filesystem::path> instance_file;
  std::optional<std::filesystem::path> partition_file;  // default: uniform mask
  std::string mode = "physical";
  double shift_u = 0.0;
  double shift_v = 0.0;
  std::size_t samples = 0;
  NoiseModel noise;
  std::filesystem::path frame_out = "frame.grid";
};
int cmd_render_frame(const RenderFrameOptions& options, const GlobalOptions& globals, std::ostream& out,
                     std::ostream& err);

// Full command-line entry point (argument parsing + dispatch).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spim::cli
