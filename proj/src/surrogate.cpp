#include "rbfsearch/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <lapacke.h>

#include "rbfsearch/design.hpp"

namespace rbfsearch {

namespace {

constexpr double kMaxCondition = 1e10;
constexpr double kFirstShift = 1e-10;
constexpr double kMaxShift = 1e-6;

// Kernels whose Phi is conditionally negative definite get a negative shift
// so the regularization moves eigenvalues away from zero.
double shift_sign(Kernel k) {
  return (k == Kernel::linear || k == Kernel::multiquadric) ? -1.0 : 1.0;
}

struct Solve {
  bool ok = false;
  double condition = 0.0;
  std::vector<double> x;
};

// Column-major symmetric system, upper triangle referenced.
Solve solve_symmetric(std::vector<double> a, std::vector<double> rhs, lapack_int m) {
  Solve s;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(m));
  const double anorm = LAPACKE_dlansy(LAPACK_COL_MAJOR, '1', 'U', m, a.data(), m);
  if (LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'U', m, a.data(), m, ipiv.data()) != 0) return s;
  double rcond = 0.0;
  if (LAPACKE_dsycon(LAPACK_COL_MAJOR, 'U', m, a.data(), m, ipiv.data(), anorm, &rcond) != 0)
    return s;
  s.condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (!(s.condition <= kMaxCondition)) return s;
  if (LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'U', m, 1, a.data(), m, ipiv.data(), rhs.data(), m) != 0)
    return s;
  if (!std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); }))
    return s;
  s.ok = true;
  s.x = std::move(rhs);
  return s;
}

}  // namespace

double kernel_value(Kernel kernel, double r) {
  if (!(r >= 0.0)) throw ContractError(fmt::format("kernel_value: negative radius {}", r));
  switch (kernel) {
    case Kernel::thin_plate_spline:
      return r > 0.0 ? r * r * std::log(r) : 0.0;
    case Kernel::cubic:
      return r * r * r;
    case Kernel::linear:
      return r;
    case Kernel::multiquadric:
      return std::sqrt(r * r + 1.0);
    case Kernel::gaussian:
      return std::exp(-r * r);
  }
  return 0.0;
}

std::vector<double> assemble_saddle_matrix(std::span<const double> coords, std::size_t dim,
                                           Kernel kernel) {
  const std::size_t k = coords.size() / dim;
  const std::size_t m = k + dim + 1;
  std::vector<double> soa(k * dim);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < dim; ++i) soa[i * k + j] = coords[j * dim + i];

  std::vector<double> a(m * m, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[c * m + r]; };

  const simd::CenterBlock block{soa.data(), k, k, dim};
  std::vector<double> d2(k), phi(k);
  for (std::size_t r = 0; r < k; ++r) {
    simd::squared_distances(coords.subspan(r * dim, dim), block, d2);
    simd::radial(kernel, d2, phi);
    // Upper triangle from row r, mirrored: Phi is symmetric bit for bit.
    for (std::size_t c = r; c < k; ++c) {
      at(r, c) = phi[c];
      at(c, r) = phi[c];
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t i = 0; i < dim; ++i) {
      at(r, k + i) = coords[r * dim + i];
      at(k + i, r) = coords[r * dim + i];
    }
    at(r, k + dim) = 1.0;
    at(k + dim, r) = 1.0;
  }
  return a;
}

RbfModel RbfModel::fit(const NodeSet& nodes, Kernel kernel) {
  return fit(nodes.coords(), nodes.values(), nodes.dim(), kernel);
}

RbfModel RbfModel::fit(std::span<const double> coords, std::span<const double> values,
                       std::size_t dim, Kernel kernel) {
  if (dim == 0 || coords.size() != values.size() * dim)
    throw ContractError("fit: coordinate/value shape mismatch");
  const std::size_t k = values.size();
  if (k < dim + 1)
    throw FitError(fmt::format("fit: {} nodes cannot support a degree-1 tail in {} dimensions",
                               k, dim));
  for (std::size_t a = 1; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (std::equal(coords.begin() + static_cast<std::ptrdiff_t>(a * dim),
                     coords.begin() + static_cast<std::ptrdiff_t>((a + 1) * dim),
                     coords.begin() + static_cast<std::ptrdiff_t>(b * dim)))
        throw FitError(fmt::format("fit: nodes {} and {} coincide", b, a));
  if (!is_poised(coords, dim)) throw FitError("fit: nodes are not poised for a linear tail");

  RbfModel model;
  model.kernel_ = kernel;
  model.dim_ = dim;
  model.centers_.assign(coords.begin(), coords.end());
  model.centers_soa_.resize(k * dim);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < dim; ++i) model.centers_soa_[i * k + j] = coords[j * dim + i];

  const std::size_t m = k + dim + 1;
  const std::vector<double> a = assemble_saddle_matrix(coords, dim, kernel);

  std::vector<double> rhs(m, 0.0);
  std::copy(values.begin(), values.end(), rhs.begin());

  Solve s = solve_symmetric(a, rhs, static_cast<lapack_int>(m));
  double shift = 0.0;
  for (double eps = kFirstShift; !s.ok && shift < kMaxShift; eps *= 2.0) {
    shift = std::min(eps, kMaxShift);
    auto shifted = a;
    for (std::size_t r = 0; r < k; ++r) shifted[r * m + r] += shift_sign(kernel) * shift;
    s = solve_symmetric(std::move(shifted), rhs, static_cast<lapack_int>(m));
  }
  if (!s.ok)
    throw FitError(fmt::format(
        "fit: system with {} nodes stays ill-conditioned after regularization {}", k, shift));

  model.lambda_.assign(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(k));
  model.poly_.assign(s.x.begin() + static_cast<std::ptrdiff_t>(k), s.x.end());
  model.regularization_ = shift;
  model.condition_ = s.condition;
  return model;
}

RbfModel::Evaluation RbfModel::evaluate(std::span<const double> x) const {
  if (x.size() != dim_) throw ContractError("predict: point has wrong dimension");
  thread_local std::vector<double> d2;
  d2.resize(lambda_.size());
  const simd::CenterBlock block{centers_soa_.data(), lambda_.size(), lambda_.size(), dim_};
  simd::squared_distances(x, block, d2);
  double v = simd::radial_dot(kernel_, d2, lambda_);
  for (std::size_t i = 0; i < dim_; ++i) v += poly_[i] * x[i];
  v += poly_[dim_];
  return {v, std::sqrt(simd::min_value(d2))};
}

double RbfModel::predict(std::span<const double> x) const { return evaluate(x).value; }

}  // namespace rbfsearch
