#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include "io_util.hpp"
#include "spim/cli.hpp"
#include "spim/problems.hpp"

namespace spim::cli {
namespace {

using nlohmann::json;

void check_keys(const json& object, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!object.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items()) {
    if (!keys.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (object.contains(key) && !object.at(key).is_null()) target = object.at(key).get<T>();
}

template <typename T>
void read_optional(const json& object, const char* key, std::optional<T>& target) {
  if (object.contains(key) && !object.at(key).is_null()) target = object.at(key).get<T>();
}

void parse_noise(const json& j, NoiseModel& noise) {
  check_keys(j, "noise",
             {"read_noise_sigma", "photon_budget", "quantization_bits", "saturation_level", "auto_exposure", "seed"});
  read(j, "read_noise_sigma", noise.read_noise_sigma);
  read_optional(j, "photon_budget", noise.photon_budget);
  read_optional(j, "quantization_bits", noise.quantization_bits);
  read(j, "saturation_level", noise.saturation_level);
  read(j, "auto_exposure", noise.auto_exposure);
  read(j, "seed", noise.rng_seed);
}

void parse_solver(const json& j, SolverConfig& solver) {
  check_keys(j, "solver",
             {"max_iterations", "flip_fraction", "flip_decay", "initial_temperature", "temperature_decay",
              "accept_margin", "remeasure_current", "backend", "seed"});
  read(j, "max_iterations", solver.max_iterations);
  read(j, "flip_fraction", solver.flip_fraction);
  read(j, "flip_decay", solver.flip_decay);
  read(j, "initial_temperature", solver.initial_temperature);
  read(j, "temperature_decay", solver.temperature_decay);
  read(j, "accept_margin", solver.accept_margin);
  read(j, "remeasure_current", solver.remeasure_current);
  if (j.contains("backend")) solver.backend = parse_backend(j.at("backend").get<std::string>());
  read(j, "seed", solver.rng_seed);
}

}  // namespace

LatticeShape lattice_for(std::size_t n) {
  if (n == 0) throw ConfigError("lattice size must be positive");
  auto n_y = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (n_y > 1 && (n_y * n_y > n || n % n_y != 0)) --n_y;
  return LatticeShape(n / n_y, n_y);
}

ExperimentConfig parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir,
                                  const GlobalOptions& globals) {
  ExperimentConfig config;
  try {
    const json root = json::parse(json_text);
    check_keys(root, "config",
               {"lattice", "instance", "optics", "detector", "noise", "solver", "output_dir", "trials", "bench"});

    if (root.contains("lattice")) {
      const json& lat = root.at("lattice");
      check_keys(lat, "lattice", {"n_x", "n_y"});
      config.lattice = LatticeShape(lat.at("n_x").get<std::size_t>(), lat.at("n_y").get<std::size_t>());
    }
    if (root.contains("instance")) {
      const json& inst = root.at("instance");
      check_keys(inst, "instance", {"seed", "file"});
      read_optional(inst, "seed", config.instance_seed);
      if (inst.contains("file")) config.instance_file = base_dir / inst.at("file").get<std::string>();
    }
    if (config.instance_seed && config.instance_file) throw ConfigError("instance: give either 'seed' or 'file'");
    if (!config.instance_file && !config.instance_seed) config.instance_seed = 1;

    if (root.contains("optics")) {
      const json& o = root.at("optics");
      check_keys(o, "optics", {"wavelength", "focal_length", "macropixel_width"});
      read(o, "wavelength", config.solver.optics.wavelength);
      read(o, "focal_length", config.solver.optics.focal_length);
      read(o, "macropixel_width", config.solver.optics.macropixel_width);
    }
    if (root.contains("detector")) {
      check_keys(root.at("detector"), "detector", {"samples_per_axis"});
      read(root.at("detector"), "samples_per_axis", config.solver.detector_samples);
    }
    if (root.contains("noise")) parse_noise(root.at("noise"), config.solver.noise);
    if (root.contains("solver")) parse_solver(root.at("solver"), config.solver);
    if (root.contains("output_dir")) config.output_dir = base_dir / root.at("output_dir").get<std::string>();
    read(root, "trials", config.trials);
    if (root.contains("bench")) {
      const json& b = root.at("bench");
      check_keys(b, "bench", {"sizes", "trials", "vary", "threads"});
      read(b, "sizes", config.bench.sizes);
      read(b, "trials", config.bench.trials);
      read(b, "vary", config.bench.vary);
      read(b, "threads", config.bench.threads);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (globals.seed) config.solver.rng_seed = *globals.seed;
  if (globals.backend) config.solver.backend = parse_backend(*globals.backend);
  if (globals.out) config.output_dir = *globals.out;

  if (config.trials == 0) throw ConfigError("trials must be positive");
  if (config.bench.trials == 0) throw ConfigError("bench.trials must be positive");
  if (config.bench.vary != "both" && config.bench.vary != "instance" && config.bench.vary != "solver") {
    throw ConfigError("bench.vary must be 'both', 'instance' or 'solver'");
  }
  if (config.instance_file) {
    try {
      const AmplitudeSet amps = read_instance(*config.instance_file).amps;
      config.lattice = amps.shape();
    } catch (const Error& e) {
      throw ConfigError(std::string("instance file: ") + e.what());
    }
  }
  config.solver.validate();
  if (config.solver.backend != Backend::ExactFast) {
    DetectorGrid::for_lattice(config.lattice, config.solver.optics, config.solver.detector_samples);
  }
  return config;
}

ExperimentConfig load_experiment(const std::filesystem::path& path, const GlobalOptions& globals) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment(text, path.parent_path(), globals);
}

}  // namespace spim::cli
