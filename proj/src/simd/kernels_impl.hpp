#pragma once

#include "rbfsearch/simd/kernels.hpp"

namespace rbfsearch::simd::detail {

/// phi(sqrt(d2)) evaluated from the squared distance; reference semantics
/// shared by every variant.
double radial_from_squared(Kernel k, double d2);

const KernelTable& scalar_table_impl();

#if defined(RBFSEARCH_HAVE_AVX2)
const KernelTable& avx2_table_impl();
#endif

}  // namespace rbfsearch::simd::detail
