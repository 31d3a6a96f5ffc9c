#pragma once

// Data-parallel inner loops of the surrogate: squared distances from one
// point to a block of centers, radial function evaluation and weighted sums.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant compiled in its own translation unit. The variant is
// chosen once at runtime from CPUID; RBFSEARCH_ISA=scalar in the environment
// or force_isa() pins the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

namespace rbfsearch {

enum class Kernel { thin_plate_spline, cubic, linear, multiquadric, gaussian };

std::string_view to_string(Kernel k);
Kernel parse_kernel(std::string_view s);

namespace simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Centers stored dimension-major: coordinate i of center j lives at
/// data[i * stride + j]. stride >= count; padding lanes are ignored.
struct CenterBlock {
  const double* data = nullptr;
  std::size_t stride = 0;
  std::size_t count = 0;
  std::size_t dim = 0;
};

struct KernelTable {
  Isa isa;
  void (*squared_distances)(const double* x, const CenterBlock& c, double* out);
  void (*radial)(Kernel k, const double* d2, double* out, std::size_t count);
  double (*radial_dot)(Kernel k, const double* d2, const double* coeffs,
                       std::size_t count);
  double (*min_value)(const double* v, std::size_t count);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_table();

bool isa_available(Isa isa);
const KernelTable& table(Isa isa);

Isa active_isa();
/// Overrides runtime selection (tests and benchmarks). Throws if unavailable.
void force_isa(Isa isa);
/// Restores CPUID/environment-based selection.
void reset_isa();

const KernelTable& active();

// Convenience wrappers over the active table.

inline void squared_distances(std::span<const double> x, const CenterBlock& c,
                              std::span<double> out) {
  active().squared_distances(x.data(), c, out.data());
}

inline void radial(Kernel k, std::span<const double> d2, std::span<double> out) {
  active().radial(k, d2.data(), out.data(), d2.size());
}

/// sum_j coeffs[j] * phi(sqrt(d2[j]))
inline double radial_dot(Kernel k, std::span<const double> d2,
                         std::span<const double> coeffs) {
  return active().radial_dot(k, d2.data(), coeffs.data(), d2.size());
}

inline double min_value(std::span<const double> v) {
  return active().min_value(v.data(), v.size());
}

}  // namespace simd
}  // namespace rbfsearch
