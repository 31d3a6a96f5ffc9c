#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rbfsearch/core.hpp"

namespace rbfsearch {

class DesignError : public Error {
 public:
  using Error::Error;
};

struct InitialDesign {
  std::vector<Point> points;        // raw coordinates, integer dims snapped
  std::vector<Point> stratified;    // scaled coordinates before snapping
  bool rank_ok = false;
  int attempts = 0;                 // regenerations used (1 = first draw accepted)
  bool perturbed = false;
};

/// True when the k x (n+1) matrix with rows (point_i, 1) has full column rank,
/// judged by sigma_min / sigma_max > tol. Points are row-major, dim n.
bool is_poised(std::span<const double> coords, std::size_t n, double tol = 1e-10);

/// Randomized Latin hypercube of k points (k >= n+1). Each dimension's scaled
/// coordinates are a random permutation of the k strata [j/k, (j+1)/k) with a
/// uniform draw inside each stratum. Integer dims are snapped afterwards and
/// the snapped design is required to be poised and free of duplicates.
InitialDesign latin_hypercube(const BoxDomain& d, std::size_t k, RngStream& rng);

}  // namespace rbfsearch
