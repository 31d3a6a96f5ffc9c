// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after a CPUID check (see dispatch.cpp).

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace rbfsearch::simd::detail {

namespace {

// Cephes log(1+x) rational approximation, valid for mantissas in
// [sqrt(1/2), sqrt(2)).
constexpr double kLogP[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                            4.70579119878881725854e0,  1.44989225341610930846e1,
                            1.79368678507819816313e1,  7.70838733755885391666e0};
constexpr double kLogQ[] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                            8.29875266912776603211e1, 7.11544750618563894466e1,
                            2.31251620126765340583e1};
constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kLn2Hi = 0.693359375;
constexpr double kLn2Lo = -2.121944400546905827679e-4;

// Natural log of four positive normal doubles.
inline __m256d log_pd(__m256d v) {
  const __m256i bits = _mm256_castpd_si256(v);
  const __m256i exp_biased = _mm256_srli_epi64(bits, 52);
  const __m256i exp_int = _mm256_sub_epi64(exp_biased, _mm256_set1_epi64x(1022));
  // int64 -> double for small magnitudes: add into the mantissa of 1.5*2^52.
  const __m256i magic_bits = _mm256_set1_epi64x(0x4338000000000000LL);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(exp_int, magic_bits)),
      _mm256_castsi256_pd(magic_bits));

  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3fe0000000000000LL));
  const __m256d m = _mm256_castsi256_pd(mant_bits);  // [0.5, 1)

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d below = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrtHalf), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, one));
  const __m256d x = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(below, m)), one);

  const __m256d z = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(kLogP[0]);
  for (int i = 1; i < 6; ++i) p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(kLogP[i]));
  __m256d q = _mm256_add_pd(x, _mm256_set1_pd(kLogQ[0]));
  for (int i = 1; i < 5; ++i) q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(kLogQ[i]));

  __m256d y = _mm256_mul_pd(x, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(x, y);
  r = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi), r);
  return r;
}

inline __m256d radial_pd(Kernel k, __m256d d2) {
  switch (k) {
    case Kernel::thin_plate_spline: {
      // Lanes at (or numerically at) zero distance contribute exactly 0.
      const __m256d live =
          _mm256_cmp_pd(d2, _mm256_set1_pd(std::numeric_limits<double>::min()), _CMP_GT_OQ);
      const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), d2, live);
      const __m256d v = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), safe), log_pd(safe));
      return _mm256_and_pd(v, live);
    }
    case Kernel::cubic:
      return _mm256_mul_pd(d2, _mm256_sqrt_pd(d2));
    case Kernel::linear:
      return _mm256_sqrt_pd(d2);
    case Kernel::multiquadric:
      return _mm256_sqrt_pd(_mm256_add_pd(d2, _mm256_set1_pd(1.0)));
    case Kernel::gaussian: {
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, d2);
      for (double& l : lanes) l = std::exp(-l);
      return _mm256_load_pd(lanes);
    }
  }
  return _mm256_setzero_pd();
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void squared_distances_avx2(const double* x, const CenterBlock& c, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= c.count; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < c.dim; ++i) {
      const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(c.data + i * c.stride + j),
                                      _mm256_set1_pd(x[i]));
      acc = _mm256_fmadd_pd(t, t, acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < c.count; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.dim; ++i) {
      const double t = c.data[i * c.stride + j] - x[i];
      s += t * t;
    }
    out[j] = s;
  }
}

void radial_avx2(Kernel k, const double* d2, double* out, std::size_t count) {
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) _mm256_storeu_pd(out + j, radial_pd(k, _mm256_loadu_pd(d2 + j)));
  for (; j < count; ++j) out[j] = radial_from_squared(k, d2[j]);
}

double radial_dot_avx2(Kernel k, const double* d2, const double* coeffs,
                       std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(coeffs + j), radial_pd(k, _mm256_loadu_pd(d2 + j)), acc);
  double s = hsum(acc);
  for (; j < count; ++j) s += coeffs[j] * radial_from_squared(k, d2[j]);
  return s;
}

double min_value_avx2(const double* v, std::size_t count) {
  __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(v + j));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int i = 1; i < 4; ++i) r = lanes[i] < r ? lanes[i] : r;
  for (; j < count; ++j) r = v[j] < r ? v[j] : r;
  return r;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable t{Isa::avx2, &squared_distances_avx2, &radial_avx2,
                             &radial_dot_avx2, &min_value_avx2};
  return t;
}

}  // namespace rbfsearch::simd::detail
