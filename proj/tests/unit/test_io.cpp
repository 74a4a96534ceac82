#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "spim/grid_io.hpp"

namespace spim {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("spim_io_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(GridIo, FrameRoundTripIsLossless) {
  std::mt19937_64 rng(1);
  const LatticeShape shape(6, 5);
  const OpticsParams params;
  const DetectorGrid grid = DetectorGrid::for_lattice(shape, params);
  NoiseModel noise;
  noise.read_noise_sigma = 0.01;
  DetectorFrame f = far_field_intensity(
      encode_phase(gauge_transform(test::random_spins(shape, rng), test::random_amplitudes(shape, rng)),
                   test::random_spins(shape, rng)),
      params, grid, FieldMode::Physical, noise);
  f.origin_offset = {0.125, -0.3};
  const auto path = temp_path("frame.grid");
  save_frame(path, f);
  const DetectorFrame g = load_frame(path);
  EXPECT_EQ(g.grid, f.grid);
  EXPECT_EQ(g.intensities, f.intensities);
  EXPECT_EQ(g.origin_offset, f.origin_offset);
  EXPECT_EQ(g.exposure_scale, f.exposure_scale);
  // saving again reproduces the same bytes
  const auto path2 = temp_path("frame2.grid");
  save_frame(path2, g);
  EXPECT_EQ(slurp(path), slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(GridIo, KernelRoundTripKeepsTarget) {
  std::mt19937_64 rng(2);
  const LatticeShape shape(4, 3);
  const DetectorGrid grid = DetectorGrid::for_lattice(shape, OpticsParams{});
  CouplingTable t = CouplingTable::constant(shape, 0.0);
  t.at(1, 1) = t.at(-1, -1) = 0.75;
  t.at(0, 0) = -2.0;
  for (const CouplingSpec& spec : {CouplingSpec::uniform_antiferromagnetic(-0.5), CouplingSpec::table(t)}) {
    CorrelationKernel k = synthesize_kernel(spec, shape, grid);
    k.origin_offset = {-0.25, 0.5};
    const auto path = temp_path("kernel.grid");
    save_kernel(path, k);
    const CorrelationKernel back = load_kernel(path);
    EXPECT_EQ(back.grid, k.grid);
    EXPECT_EQ(back.shape, k.shape);
    EXPECT_EQ(back.weights, k.weights);
    EXPECT_EQ(back.origin_offset, k.origin_offset);
    EXPECT_EQ(back.target.kind, spec.kind);
    EXPECT_EQ(back.target.strength, spec.strength);
    if (spec.g_table) {
      ASSERT_TRUE(back.target.g_table.has_value());
      EXPECT_TRUE(std::equal(spec.g_table->values().begin(), spec.g_table->values().end(),
                             back.target.g_table->values().begin()));
    }
    std::filesystem::remove(path);
  }
}

TEST(GridIo, LoadingTheWrongKindFails) {
  const LatticeShape shape(3, 3);
  const DetectorGrid grid = DetectorGrid::for_lattice(shape, OpticsParams{});
  const auto path = temp_path("kind.grid");
  save_kernel(path, synthesize_kernel(CouplingSpec::uniform_antiferromagnetic(), shape, grid));
  EXPECT_THROW(load_frame(path), IoError);
  std::filesystem::remove(path);
}

TEST(GridIo, MalformedFilesRaiseIoError) {
  const LatticeShape shape(2, 2);
  const DetectorGrid grid = DetectorGrid::for_lattice(shape, OpticsParams{});
  const DetectorFrame f = far_field_intensity(uniform_mask(shape), OpticsParams{}, grid, FieldMode::Ideal, {});
  const auto good = temp_path("good.grid");
  save_frame(good, f);
  const std::string text = slurp(good);
  const auto bad = temp_path("bad.grid");
  const auto check = [&](const std::string& contents) {
    std::ofstream(bad) << contents;
    EXPECT_THROW(load_frame(bad), IoError) << contents.substr(0, 40);
  };
  check("");
  check("not-a-grid 1\n");
  check(text.substr(0, text.size() / 2));  // truncated data
  std::string negative = text;
  negative.replace(negative.rfind("data\n") + 5, 1, "-");
  check(negative);
  std::string garbage = text;
  garbage.replace(garbage.rfind("data\n") + 5, 1, "x");
  check(garbage);
  std::string extra = text + "1 2 3\n";
  check(extra);
  EXPECT_THROW(load_frame(temp_path("missing.grid")), IoError);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

}  // namespace
}  // namespace spim
