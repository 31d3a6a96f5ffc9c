#pragma once

// Rank statistics for comparing algorithms over matched runs.

#include <cstddef>
#include <vector>

#include "rbfsearch/core.hpp"

namespace rbfsearch::stats {

/// runs x algorithms
using Table = std::vector<std::vector<double>>;

/// Ranks each row, 1 = best under `sense`, tied values share the average rank.
Table rank_rows(const Table& values, ObjectiveSense sense);

struct FriedmanResult {
  double statistic = 0.0;
  double critical_95 = 0.0;
  bool significant_95 = false;
};

/// Chi-square 95% critical value for df in [1, 10].
double chi_square_critical_95(std::size_t df);

/// Friedman statistic 12N/(k(k+1)) * sum_j R_j^2 - 3N(k+1) over a table of
/// ranks (R_j = mean rank of column j). Throws ContractError for fewer than
/// two runs or algorithms, ragged rows, non-finite entries or k - 1 > 10.
FriedmanResult friedman(const Table& ranks);

/// Entry (i, j): runs in which algorithm i is at least as good as j.
std::vector<std::vector<std::size_t>> count_better_matrix(const Table& values,
                                                          ObjectiveSense sense);

/// '>' when i beats j in more runs than the reverse, '<' for the opposite,
/// '=' otherwise.
char direction_marker(const std::vector<std::vector<std::size_t>>& cb, std::size_t i,
                      std::size_t j);

}  // namespace rbfsearch::stats
