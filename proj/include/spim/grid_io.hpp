#pragma once

#include <filesystem>
#include <string>

#include "spim/correlation.hpp"
#include "spim/optics.hpp"

namespace spim {

// Text grid file shared by detector frames and correlation kernels:
//
//   spim-grid 1
//   kind <frame|kernel>
//   samples <M>
//   pixel_pitch <du in metres>
//   exposure_scale <s>
//   origin_offset <du_px> <dv_px>
//   metadata <single-line JSON object>
//   data
//   <M lines of M whitespace-separated values, row v = 0..M-1, column u = 0..M-1>
//
// Numbers are written in shortest round-trip form, so a save/load cycle is
// lossless. Kernel metadata records the lattice shape and target coupling.
void save_frame(const std::filesystem::path& path, const DetectorFrame& frame);
DetectorFrame load_frame(const std::filesystem::path& path);

void save_kernel(const std::filesystem::path& path, const CorrelationKernel& kernel);
CorrelationKernel load_kernel(const std::filesystem::path& path);

}  // namespace spim
