#include <atomic>
#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "kernels_impl.hpp"
#include "rbfsearch/core.hpp"

namespace rbfsearch {

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::thin_plate_spline: return "thin_plate_spline";
    case Kernel::cubic: return "cubic";
    case Kernel::linear: return "linear";
    case Kernel::multiquadric: return "multiquadric";
    case Kernel::gaussian: return "gaussian";
  }
  return "unknown";
}

Kernel parse_kernel(std::string_view s) {
  for (Kernel k : {Kernel::thin_plate_spline, Kernel::cubic, Kernel::linear,
                   Kernel::multiquadric, Kernel::gaussian})
    if (to_string(k) == s) return k;
  throw ConfigError(fmt::format("unknown kernel '{}'", s));
}

namespace simd {

namespace {

bool cpu_has_avx2() {
#if defined(RBFSEARCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("RBFSEARCH_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return detail::scalar_table_impl(); }

const KernelTable* avx2_table() {
#if defined(RBFSEARCH_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

bool isa_available(Isa isa) { return isa == Isa::scalar || avx2_table() != nullptr; }

const KernelTable& table(Isa isa) {
  if (isa == Isa::avx2) {
    if (const auto* t = avx2_table()) return *t;
    throw ContractError("AVX2 kernels are not available on this machine");
  }
  return scalar_table();
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &table(detect());
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) { g_active.store(&table(isa), std::memory_order_release); }

void reset_isa() { g_active.store(&table(detect()), std::memory_order_release); }

}  // namespace simd
}  // namespace rbfsearch
