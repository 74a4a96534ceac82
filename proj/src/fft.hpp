#pragma once

#include <complex>
#include <cstddef>

namespace spim::detail {

enum class FftSign { Negative, Positive };

// In-place 2-D DFT of an M x M row-major buffer:
//   out[q] = sum_k in[k] * exp(+-i 2 pi k.q / M)   (unnormalized)
// Plans are created once per (M, sign) with FFTW_ESTIMATE so that results
// are reproducible from run to run, and are safe to execute from several
// threads.
void fft2d_inplace(std::complex<double>* data, std::size_t m, FftSign sign);

}  // namespace spim::detail
