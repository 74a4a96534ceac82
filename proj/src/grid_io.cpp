#include "spim/grid_io.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <vector>

#include "io_util.hpp"

namespace spim {
namespace {

using nlohmann::json;

struct GridFile {
  std::string kind;
  std::size_t samples = 0;
  double pixel_pitch = 0.0;
  double exposure_scale = 1.0;
  OriginOffset offset;
  json metadata = json::object();
  std::vector<double> data;
};

void write_grid(const std::filesystem::path& path, const GridFile& g) {
  std::string text;
  text.reserve(g.data.size() * 24 + 256);
  text += "spim-grid 1\n";
  text += "kind " + g.kind + "\n";
  text += "samples " + std::to_string(g.samples) + "\n";
  text += "pixel_pitch " + detail::format_double(g.pixel_pitch) + "\n";
  text += "exposure_scale " + detail::format_double(g.exposure_scale) + "\n";
  text += "origin_offset " + detail::format_double(g.offset.du) + " " + detail::format_double(g.offset.dv) + "\n";
  text += "metadata " + g.metadata.dump() + "\n";
  text += "data\n";
  for (std::size_t v = 0; v < g.samples; ++v) {
    for (std::size_t u = 0; u < g.samples; ++u) {
      if (u != 0) text += ' ';
      text += detail::format_double(g.data[v * g.samples + u]);
    }
    text += '\n';
  }
  detail::write_file_atomic(path, text);
}

GridFile read_grid(const std::filesystem::path& path, const std::string& expected_kind) {
  std::istringstream in(detail::read_file(path));
  auto fail = [&](const std::string& why) { return IoError(path.string() + ": " + why); };
  auto next_line = [&](const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw fail("missing '" + key + "' line");
    if (line.rfind(key, 0) != 0) throw fail("expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };

  if (next_line("spim-grid") != "1") throw fail("unsupported grid file version");
  GridFile g;
  g.kind = next_line("kind");
  if (g.kind != expected_kind) throw fail("expected a " + expected_kind + " file, found " + g.kind);
  g.samples = static_cast<std::size_t>(detail::parse_double(next_line("samples"), path));
  g.pixel_pitch = detail::parse_double(next_line("pixel_pitch"), path);
  g.exposure_scale = detail::parse_double(next_line("exposure_scale"), path);
  {
    std::istringstream offs(next_line("origin_offset"));
    std::string du, dv;
    if (!(offs >> du >> dv)) throw fail("origin_offset needs two values");
    g.offset = OriginOffset{detail::parse_double(du, path), detail::parse_double(dv, path)};
  }
  try {
    g.metadata = json::parse(next_line("metadata"));
  } catch (const json::exception& e) {
    throw fail(std::string("bad metadata: ") + e.what());
  }
  next_line("data");
  g.data.reserve(g.samples * g.samples);
  std::string token;
  while (in >> token) g.data.push_back(detail::parse_double(token, path));
  if (g.data.size() != g.samples * g.samples) {
    throw fail("expected " + std::to_string(g.samples * g.samples) + " values, found " + std::to_string(g.data.size()));
  }
  return g;
}

json coupling_to_json(const CouplingSpec& spec) {
  json j;
  if (spec.kind == CouplingKind::UniformAntiferromagnetic) {
    j["kind"] = "uniform_antiferromagnetic";
    j["strength"] = spec.strength;
  } else {
    j["kind"] = "table";
    j["n_x"] = spec.g_table->shape().n_x();
    j["n_y"] = spec.g_table->shape().n_y();
    j["values"] = std::vector<double>(spec.g_table->values().begin(), spec.g_table->values().end());
  }
  return j;
}

CouplingSpec coupling_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform_antiferromagnetic") return CouplingSpec::uniform_antiferromagnetic(j.at("strength").get<double>());
  if (kind == "table") {
    LatticeShape shape(j.at("n_x").get<std::size_t>(), j.at("n_y").get<std::size_t>());
    return CouplingSpec::table(CouplingTable(shape, j.at("values").get<std::vector<double>>()));
  }
  throw IoError("unknown coupling kind '" + kind + "'");
}

}  // namespace

void save_frame(const std::filesystem::path& path, const DetectorFrame& frame) {
  write_grid(path, GridFile{"frame", frame.grid.size(), frame.grid.pixel_pitch(), frame.exposure_scale,
                            frame.origin_offset, json::object(), frame.intensities});
}

DetectorFrame load_frame(const std::filesystem::path& path) {
  GridFile g = read_grid(path, "frame");
  DetectorGrid grid = DetectorGrid::from_pitch(g.samples, g.pixel_pitch);
  for (double v : g.data) {
    if (!(v >= 0.0)) throw IoError(path.string() + ": frame intensities must be non-negative");
  }
  if (!(g.exposure_scale > 0.0)) throw IoError(path.string() + ": exposure_scale must be positive");
  return DetectorFrame{grid, std::move(g.data), g.offset, g.exposure_scale};
}

void save_kernel(const std::filesystem::path& path, const CorrelationKernel& kernel) {
  json meta;
  meta["n_x"] = kernel.shape.n_x();
  meta["n_y"] = kernel.shape.n_y();
  meta["target"] = coupling_to_json(kernel.target);
  write_grid(path, GridFile{"kernel", kernel.grid.size(), kernel.grid.pixel_pitch(), 1.0, kernel.origin_offset,
                            meta, kernel.weights});
}

CorrelationKernel load_kernel(const std::filesystem::path& path) {
  GridFile g = read_grid(path, "kernel");
  try {
    LatticeShape shape(g.metadata.at("n_x").get<std::size_t>(), g.metadata.at("n_y").get<std::size_t>());
    CouplingSpec target = coupling_from_json(g.metadata.at("target"));
    return CorrelationKernel{DetectorGrid::from_pitch(g.samples, g.pixel_pitch), shape, std::move(g.data),
                             std::move(target), g.offset};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad kernel metadata: " + e.what());
  }
}

}  // namespace spim
