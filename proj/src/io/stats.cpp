#include "rbfsearch/io/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace rbfsearch::stats {

namespace {

void check_shape(const Table& t, const char* what) {
  if (t.size() < 2) throw ContractError(fmt::format("{}: need at least 2 runs", what));
  const std::size_t k = t.front().size();
  if (k < 2) throw ContractError(fmt::format("{}: need at least 2 algorithms", what));
  for (const auto& row : t) {
    if (row.size() != k) throw ContractError(fmt::format("{}: ragged table", what));
    for (double v : row)
      if (!std::isfinite(v)) throw ContractError(fmt::format("{}: non-finite entry", what));
  }
}

}  // namespace

Table rank_rows(const Table& values, ObjectiveSense sense) {
  Table out;
  out.reserve(values.size());
  for (const auto& row : values) {
    std::vector<std::size_t> idx(row.size());
    std::iota(idx.begin(), idx.end(), 0);
    // best first
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return sense.to_internal(row[a]) < sense.to_internal(row[b]);
    });
    std::vector<double> ranks(row.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && row[idx[j + 1]] == row[idx[i]]) ++j;
      const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
      i = j + 1;
    }
    out.push_back(std::move(ranks));
  }
  return out;
}

double chi_square_critical_95(std::size_t df) {
  static constexpr double kTable[] = {3.841, 5.991, 7.815, 9.488,  11.070,
                                      12.592, 14.067, 15.507, 16.919, 18.307};
  if (df < 1 || df > 10) throw ContractError(fmt::format("no critical value for df={}", df));
  return kTable[df - 1];
}

FriedmanResult friedman(const Table& ranks) {
  check_shape(ranks, "friedman");
  const auto n = static_cast<double>(ranks.size());
  const std::size_t k = ranks.front().size();
  const auto kd = static_cast<double>(k);

  double sum_sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double r = 0.0;
    for (const auto& row : ranks) r += row[j];
    r /= n;
    sum_sq += r * r;
  }
  FriedmanResult res;
  res.statistic = std::max(0.0, 12.0 * n / (kd * (kd + 1.0)) * sum_sq - 3.0 * n * (kd + 1.0));
  // all-tied tables leave rounding residue of a few ulps
  if (res.statistic < 1e-9) res.statistic = 0.0;
  res.critical_95 = chi_square_critical_95(k - 1);
  res.significant_95 = res.statistic > res.critical_95;
  return res;
}

std::vector<std::vector<std::size_t>> count_better_matrix(const Table& values,
                                                          ObjectiveSense sense) {
  const std::size_t k = values.empty() ? 0 : values.front().size();
  std::vector<std::vector<std::size_t>> cb(k, std::vector<std::size_t>(k, 0));
  for (const auto& row : values) {
    if (row.size() != k) throw ContractError("count_better_matrix: ragged table");
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (sense.at_least_as_good(row[i], row[j])) ++cb[i][j];
  }
  return cb;
}

char direction_marker(const std::vector<std::vector<std::size_t>>& cb, std::size_t i,
                      std::size_t j) {
  if (cb[i][j] > cb[j][i]) return '>';
  if (cb[i][j] < cb[j][i]) return '<';
  return '=';
}

}  // namespace rbfsearch::stats
