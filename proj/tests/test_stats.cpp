#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rbfsearch/io/stats.hpp"

using namespace rbfsearch;
using namespace rbfsearch::stats;

namespace {

// Alternative form of the statistic: 12/(N k (k+1)) * sum_j S_j^2 - 3N(k+1)
// with S_j the rank sums.
double friedman_rank_sums(const Table& ranks) {
  const double n = static_cast<double>(ranks.size());
  const double k = static_cast<double>(ranks[0].size());
  double s = 0.0;
  for (std::size_t j = 0; j < ranks[0].size(); ++j) {
    double sj = 0.0;
    for (const auto& r : ranks) sj += r[j];
    s += sj * sj;
  }
  return 12.0 / (n * k * (k + 1.0)) * s - 3.0 * n * (k + 1.0);
}

Table random_rank_table(RngStream& rng, std::size_t n, std::size_t k) {
  Table t;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(k);
    std::iota(row.begin(), row.end(), 1.0);
    for (std::size_t j = k - 1; j > 0; --j)
      std::swap(row[j], row[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)))]);
    t.push_back(row);
  }
  return t;
}

}  // namespace

TEST(Ranks, AverageTiesAndSense) {
  const Table v{{3.0, 1.0, 2.0}, {1.0, 1.0, 5.0}};
  const auto r = rank_rows(v, ObjectiveSense{});
  EXPECT_EQ(r[0], (std::vector{3.0, 1.0, 2.0}));
  EXPECT_EQ(r[1], (std::vector{1.5, 1.5, 3.0}));
  const auto m = rank_rows(v, ObjectiveSense{Sense::maximize});
  EXPECT_EQ(m[0], (std::vector{1.0, 3.0, 2.0}));
  EXPECT_EQ(m[1], (std::vector{2.5, 2.5, 1.0}));
}

TEST(Friedman, TwoAlgorithmsOneAlwaysWins) {
  Table t(10, std::vector{1.0, 2.0});
  const auto f = friedman(t);
  EXPECT_DOUBLE_EQ(f.statistic, 10.0);
  EXPECT_EQ(f.critical_95, 3.841);
  EXPECT_TRUE(f.significant_95);
}

TEST(Friedman, IdenticalRankingsThreeAlgorithms) {
  Table t(10, std::vector{1.0, 2.0, 3.0});
  EXPECT_EQ(friedman(t).statistic, 20.0);
}

TEST(Friedman, AllTiesIsZero) {
  Table t(7, std::vector{2.0, 2.0, 2.0});
  const auto f = friedman(t);
  EXPECT_EQ(f.statistic, 0.0);
  EXPECT_FALSE(f.significant_95);
}

TEST(Friedman, DegenerateTablesAreContractErrors) {
  EXPECT_THROW(friedman(Table{{1.0, 2.0}}), ContractError);
  EXPECT_THROW(friedman(Table{{1.0}, {1.0}}), ContractError);
  EXPECT_THROW(friedman(Table{{1.0, 2.0}, {1.0}}), ContractError);
  EXPECT_THROW(friedman(Table{{1.0, NAN}, {1.0, 2.0}}), ContractError);
  EXPECT_THROW(friedman(Table(3, std::vector<double>(12, 1.0))), ContractError);
}

TEST(Friedman, AgreesWithRankSumForm) {
  RngStream rng(1, "friedman");
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 30));
    const auto k = static_cast<std::size_t>(rng.uniform_int(2, 8));
    const auto tab = random_rank_table(rng, n, k);
    EXPECT_NEAR(friedman(tab).statistic, std::max(0.0, friedman_rank_sums(tab)), 1e-9);
  }
}

TEST(Friedman, ExactNullDistributionForSmallCase) {
  // Enumerate every k=2, N=6 table: the statistic is (2w - N)^2 / N where w is
  // the number of wins; P(stat > 3.841) = P(|2w-6| >= 5) = 2/64.
  int flagged = 0;
  for (int mask = 0; mask < 64; ++mask) {
    Table t;
    for (int i = 0; i < 6; ++i)
      t.push_back((mask >> i) & 1 ? std::vector{1.0, 2.0} : std::vector{2.0, 1.0});
    const int w = __builtin_popcount(static_cast<unsigned>(mask));
    const auto f = friedman(t);
    EXPECT_NEAR(f.statistic, (2.0 * w - 6.0) * (2.0 * w - 6.0) / 6.0, 1e-12);
    flagged += f.significant_95 ? 1 : 0;
  }
  EXPECT_EQ(flagged, 2);
}

TEST(Friedman, MonotoneTransformInvariance) {
  RngStream rng(2, "mono");
  for (int t = 0; t < 50; ++t) {
    Table v(8, std::vector<double>(4));
    for (auto& row : v)
      for (auto& x : row) x = rng.uniform(0.1, 10.0);
    Table w = v;
    for (auto& row : w)
      for (auto& x : row) x = std::exp(3.0 * x) + 7.0;
    EXPECT_EQ(friedman(rank_rows(v, {})).statistic, friedman(rank_rows(w, {})).statistic);
  }
}

TEST(Friedman, NullFalsePositiveRate) {
  RngStream rng(3, "null");
  int flagged = 0;
  for (int t = 0; t < 1000; ++t) flagged += friedman(random_rank_table(rng, 10, 3)).significant_95;
  EXPECT_LE(flagged, 80);
  EXPECT_GE(flagged, 20);
}

TEST(CountBetter, TiesDominanceAndDiagonal) {
  const Table same{{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
  auto cb = count_better_matrix(same, {});
  EXPECT_EQ(cb[0][1], 3u);
  EXPECT_EQ(cb[1][0], 3u);
  EXPECT_EQ(direction_marker(cb, 0, 1), '=');
  const Table dom{{1.0, 2.0}, {0.0, 5.0}, {-1.0, 1.0}};
  cb = count_better_matrix(dom, {});
  EXPECT_EQ(cb[0][1], 3u);
  EXPECT_EQ(cb[1][0], 0u);
  EXPECT_EQ(cb[0][0], 3u);
  EXPECT_EQ(direction_marker(cb, 0, 1), '>');
  EXPECT_EQ(direction_marker(cb, 1, 0), '<');
  cb = count_better_matrix(dom, ObjectiveSense{Sense::maximize});
  EXPECT_EQ(cb[1][0], 3u);
}

TEST(CountBetter, PairsCoverEveryRun) {
  RngStream rng(4, "cb");
  Table v(25, std::vector<double>(3));
  for (auto& row : v)
    for (auto& x : row) x = static_cast<double>(rng.uniform_int(0, 3));
  const auto cb = count_better_matrix(v, {});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(cb[i][i], 25u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_GE(cb[i][j] + cb[j][i], 25u);
  }
}

TEST(Critical, Table) {
  EXPECT_EQ(chi_square_critical_95(1), 3.841);
  EXPECT_EQ(chi_square_critical_95(10), 18.307);
  EXPECT_THROW(chi_square_critical_95(0), ContractError);
  EXPECT_THROW(chi_square_critical_95(11), ContractError);
}
