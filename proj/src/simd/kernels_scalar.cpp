#include "kernels_impl.hpp"

#include <cmath>
#include <limits>

namespace rbfsearch::simd::detail {

namespace {

void squared_distances_scalar(const double* x, const CenterBlock& c, double* out) {
  for (std::size_t j = 0; j < c.count; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < c.dim; ++i) {
    const double* row = c.data + i * c.stride;
    const double xi = x[i];
    for (std::size_t j = 0; j < c.count; ++j) {
      const double t = row[j] - xi;
      out[j] += t * t;
    }
  }
}

void radial_scalar(Kernel k, const double* d2, double* out, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) out[j] = radial_from_squared(k, d2[j]);
}

double radial_dot_scalar(Kernel k, const double* d2, const double* coeffs,
                         std::size_t count) {
  double s = 0.0;
  for (std::size_t j = 0; j < count; ++j) s += coeffs[j] * radial_from_squared(k, d2[j]);
  return s;
}

double min_value_scalar(const double* v, std::size_t count) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < count; ++j) m = v[j] < m ? v[j] : m;
  return m;
}

}  // namespace

double radial_from_squared(Kernel k, double d2) {
  switch (k) {
    case Kernel::thin_plate_spline:
      return d2 > 0.0 ? 0.5 * d2 * std::log(d2) : 0.0;
    case Kernel::cubic:
      return d2 * std::sqrt(d2);
    case Kernel::linear:
      return std::sqrt(d2);
    case Kernel::multiquadric:
      return std::sqrt(d2 + 1.0);
    case Kernel::gaussian:
      return std::exp(-d2);
  }
  return 0.0;
}

const KernelTable& scalar_table_impl() {
  static const KernelTable t{Isa::scalar, &squared_distances_scalar, &radial_scalar,
                             &radial_dot_scalar, &min_value_scalar};
  return t;
}

}  // namespace rbfsearch::simd::detail
