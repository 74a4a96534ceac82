#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace spim::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

fftw_plan plan_for(std::size_t m, int direction) {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto it = c.plans.find({m, direction});
  if (it != c.plans.end()) return it->second;
  // FFTW_ESTIMATE does not touch the buffer, so a scratch array is enough.
  auto* scratch = fftw_alloc_complex(m * m);
  const int n = static_cast<int>(m);
  fftw_plan plan = fftw_plan_dft_2d(n, n, scratch, scratch, direction, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  c.plans.emplace(std::make_pair(m, direction), plan);
  return plan;
}

}  // namespace

void fft2d_inplace(std::complex<double>* data, std::size_t m, FftSign sign) {
  const int direction = sign == FftSign::Negative ? FFTW_FORWARD : FFTW_BACKWARD;
  auto* buffer = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(m, direction), buffer, buffer);
}

}  // namespace spim::detail
