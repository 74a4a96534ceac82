#include <atomic>
#include <cstdlib>
#include <string>

#include "spim/errors.hpp"
#include "spim/simd/kernels.hpp"

namespace spim::simd {
namespace {

bool cpu_has_avx2() {
#if defined(SPIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("SPIM_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") return Isa::Scalar;
    if (choice == "avx2" && cpu_has_avx2()) return Isa::Avx2;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::Scalar};

const KernelTable& table_for(Isa isa) {
#if defined(SPIM_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2_kernels();
#endif
  (void)isa;
  return scalar_kernels();
}

}  // namespace

bool isa_supported(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw ConfigError("SIMD variant not supported on this CPU");
  g_isa.store(isa);
  g_table.store(&table_for(isa));
}

Isa active_isa() {
  kernels();
  return g_isa.load();
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels() {
  const KernelTable* table = g_table.load(std::memory_order_acquire);
  if (table == nullptr) {
    const Isa isa = detect();
    g_isa.store(isa);
    table = &table_for(isa);
    g_table.store(table, std::memory_order_release);
  }
  return *table;
}

}  // namespace spim::simd
