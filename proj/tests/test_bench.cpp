#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "rbfsearch/io/bench.hpp"
#include "rbfsearch/io/testfns.hpp"

using namespace rbfsearch;
using namespace rbfsearch::bench;

namespace {

double seconds_of(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunRecord fake(std::string fn, std::uint64_t seed, std::size_t workers,
               std::optional<double> t1, Algorithm a = Algorithm::rbf, double best = 0.0) {
  RunRecord r;
  r.function = std::move(fn);
  r.seed = seed;
  r.workers = workers;
  r.algorithm = a;
  r.best = best;
  r.time_to_1pct_s = t1;
  r.solved_1pct = t1.has_value();
  return r;
}

}  // namespace

TEST(Latency, DeterministicPerPointAndBounded) {
  const Objective f = [](std::span<const double> x) { return x[0]; };
  const auto slow = with_latency(f, 20.0, 40.0, 3);
  const Point p{0.5};
  const double a = seconds_of([&] { slow(p); });
  const double b = seconds_of([&] { slow(p); });
  EXPECT_GE(a, 0.020);
  EXPECT_LT(a, 0.040 + 0.05);
  EXPECT_NEAR(a, b, 0.015);
  EXPECT_EQ(slow(p), 0.5);
  const auto fast = with_latency(f, 0.0, 0.0, 3);
  EXPECT_LT(seconds_of([&] { fast(p); }), 0.005);
}

TEST(Spec, ValidationAndBudgetRule) {
  BenchSpec s;
  s.functions = {"branin"};
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.budget_for(2), 180u);
  s.fixed_budget = 100;
  EXPECT_EQ(s.budget_for(6), 100u);
  s.functions = {"griewank"};
  EXPECT_THROW(s.validate(), ConfigError);
  s.functions = {"branin"};
  s.latency_lo_ms = 10;
  s.latency_hi_ms = 5;
  EXPECT_THROW(s.validate(), ConfigError);
  s.latency_lo_ms = 0;
  s.seeds = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(parse_algorithm("rs"), Algorithm::random_search);
  EXPECT_THROW(parse_algorithm("bayes"), ConfigError);
}

TEST(RunOne, GapAndTimesAreConsistent) {
  BenchSpec s;
  s.functions = {"branin"};
  const auto r = run_one(s, "branin", 2, Algorithm::rbf, 1);
  EXPECT_EQ(r.evaluations, 180u);
  EXPECT_EQ(r.trace.size(), 180u);
  EXPECT_EQ(r.trace.back(), r.best);
  EXPECT_NEAR(r.gap, testfns::optimality_gap(r.best, testfns::get("branin").optimum), 0.0);
  EXPECT_EQ(r.solved_1pct, r.time_to_1pct_s.has_value());
  if (r.time_to_01pct_s) {
    EXPECT_LE(*r.time_to_1pct_s, *r.time_to_01pct_s);
  }
}

TEST(RunOne, StopWhenSolvedOnlyTrimsTail) {
  BenchSpec s;
  s.functions = {"sphere2"};
  const auto full = run_one(s, "sphere2", 4, Algorithm::rbf, 1);
  s.stop_when_solved = true;
  const auto cut = run_one(s, "sphere2", 4, Algorithm::rbf, 1);
  ASSERT_TRUE(full.solved_01pct);
  EXPECT_TRUE(cut.solved_01pct);
  EXPECT_LE(cut.evaluations, full.evaluations);
  for (std::size_t i = 0; i < cut.trace.size(); ++i) EXPECT_EQ(cut.trace[i], full.trace[i]);
}

TEST(RunOne, LatencyLowerBoundsWallClock) {
  // 12 evaluations at >= 30 ms each over 4 workers cannot finish in < 90 ms
  BenchSpec s;
  s.functions = {"branin"};
  s.fixed_budget = 12;
  s.latency_lo_ms = 30;
  s.latency_hi_ms = 40;
  const auto r = run_one(s, "branin", 1, Algorithm::rbf, 4);
  EXPECT_EQ(r.evaluations, 12u);
  EXPECT_GE(r.wall_s, 12 * 0.030 / 4);
}

TEST(Summarize, SpeedupUsesCommonSolvedSet) {
  BenchSpec s;
  s.functions = {"a", "b"};
  s.worker_counts = {1, 2};
  std::vector<RunRecord> runs{
      fake("a", 1, 1, 4.0), fake("a", 1, 2, 2.0),
      fake("b", 1, 1, 6.0), fake("b", 1, 2, std::nullopt),  // not common
      fake("a", 2, 1, 8.0), fake("a", 2, 2, 3.0),
  };
  const auto rep = summarize(s, runs);
  ASSERT_EQ(rep.scaling.size(), 2u);
  EXPECT_EQ(rep.scaling[0].common_1pct, 2u);
  EXPECT_DOUBLE_EQ(*rep.scaling[0].mean_time_1pct_s, 6.0);
  EXPECT_DOUBLE_EQ(*rep.scaling[1].mean_time_1pct_s, 2.5);
  EXPECT_DOUBLE_EQ(*rep.scaling[0].speedup_1pct, 1.0);
  EXPECT_DOUBLE_EQ(*rep.scaling[1].speedup_1pct, 2.4);
  EXPECT_EQ(rep.scaling[0].solved_1pct, 3u);
  EXPECT_EQ(rep.scaling[1].solved_1pct, 2u);
  EXPECT_FALSE(rep.scaling[0].mean_time_01pct_s.has_value());
}

TEST(Summarize, ComparisonTables) {
  BenchSpec s;
  s.functions = {"f"};
  s.algorithms = {Algorithm::rbf, Algorithm::random_search};
  std::vector<RunRecord> runs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    runs.push_back(fake("f", seed, 1, std::nullopt, Algorithm::rbf, 1.0));
    runs.push_back(fake("f", seed, 1, std::nullopt, Algorithm::random_search, 2.0));
  }
  const auto rep = summarize(s, runs);
  ASSERT_EQ(rep.per_function.size(), 1u);
  EXPECT_EQ(rep.per_function[0].count_better[0][1], 10u);
  EXPECT_EQ(rep.per_function[0].count_better[1][0], 0u);
  EXPECT_DOUBLE_EQ(rep.per_function[0].friedman.statistic, 10.0);
  EXPECT_TRUE(rep.per_function[0].friedman.significant_95);
  const auto text = format_report(rep);
  EXPECT_NE(text.find("significant"), std::string::npos);
  const auto j = report_json(rep);
  EXPECT_EQ(j["runs"].size(), 20u);
  EXPECT_EQ(j["per_function"][0]["friedman"]["significant_95"], true);
}

TEST(RunBench, SingleWorkerSpeedupIsOne) {
  BenchSpec s;
  s.functions = {"sphere2"};
  s.seeds = 2;
  s.fixed_budget = 40;
  const auto rep = run_bench(s);
  ASSERT_EQ(rep.scaling.size(), 1u);
  EXPECT_EQ(rep.runs.size(), 2u);
  if (rep.scaling[0].speedup_1pct) {
    EXPECT_EQ(*rep.scaling[0].speedup_1pct, 1.0);
  }
}
