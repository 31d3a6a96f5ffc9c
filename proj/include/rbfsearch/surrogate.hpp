#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rbfsearch/core.hpp"
#include "rbfsearch/simd/kernels.hpp"

namespace rbfsearch {

class FitError : public Error {
 public:
  using Error::Error;
};

/// Radial function phi(r). Throws ContractError for r < 0.
double kernel_value(Kernel kernel, double r);

/// Column-major (k+n+1)^2 matrix [[Phi, P], [P^T, 0]] for row-major scaled
/// centers, with Phi_ij = phi(|c_i - c_j|) and P rows (c_i, 1).
std::vector<double> assemble_saddle_matrix(std::span<const double> coords, std::size_t dim,
                                           Kernel kernel);

/// Radial basis interpolant with a degree-1 polynomial tail,
///
///   s(x) = sum_i lambda_i phi(|x - c_i|) + a.x + b,
///
/// over centers in the scaled unit box. Immutable once fitted.
class RbfModel {
 public:
  struct Evaluation {
    double value;
    double min_distance;  // Euclidean distance to the nearest center
  };

  /// Solves the symmetric saddle-point system
  ///   [Phi  P] [lambda]   [values]
  ///   [P^T  0] [  c   ] = [  0   ]
  /// with a Bunch-Kaufman factorization. If the factorization fails or the
  /// reciprocal condition estimate falls below 1e-10, Phi's diagonal is
  /// shifted by eps (1e-10 doubling to 1e-6) until it succeeds.
  static RbfModel fit(const NodeSet& nodes, Kernel kernel = Kernel::thin_plate_spline);
  static RbfModel fit(std::span<const double> coords, std::span<const double> values,
                      std::size_t dim, Kernel kernel = Kernel::thin_plate_spline);

  double predict(std::span<const double> x) const;
  Evaluation evaluate(std::span<const double> x) const;

  Kernel kernel() const { return kernel_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return lambda_.size(); }
  std::span<const double> radial_coeffs() const { return lambda_; }
  /// Linear part (length n) followed by the constant.
  std::span<const double> poly_coeffs() const { return poly_; }
  double regularization_used() const { return regularization_; }
  double condition_estimate() const { return condition_; }
  std::span<const double> center(std::size_t i) const {
    return {centers_.data() + i * dim_, dim_};
  }

 private:
  RbfModel() = default;

  Kernel kernel_ = Kernel::thin_plate_spline;
  std::size_t dim_ = 0;
  std::vector<double> centers_;      // row-major
  std::vector<double> centers_soa_;  // dimension-major, stride = size()
  std::vector<double> lambda_;
  std::vector<double> poly_;
  double regularization_ = 0.0;
  double condition_ = 0.0;
};

}  // namespace rbfsearch
