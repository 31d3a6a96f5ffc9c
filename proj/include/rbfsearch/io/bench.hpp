#pragma once

// Benchmark harness over the analytic suite: convergence counts, surrogate
// vs random-search comparisons, and parallel scaling under simulated latency.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rbfsearch/engine.hpp"
#include "rbfsearch/io/runlog.hpp"
#include "rbfsearch/io/stats.hpp"

namespace rbfsearch::bench {

enum class Algorithm { rbf, random_search };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct BenchSpec {
  std::vector<std::string> functions;
  std::size_t seeds = 5;
  std::uint64_t base_seed = 1;
  std::vector<std::size_t> worker_counts{1};
  std::vector<Algorithm> algorithms{Algorithm::rbf};
  double latency_lo_ms = 0.0;
  double latency_hi_ms = 0.0;
  std::size_t budget_per_dim = 60;            // evaluations = budget_per_dim * (n + 1)
  std::optional<std::size_t> fixed_budget;    // overrides the rule above
  /// Stop a run once it is within 0.1% of the optimum. The solved flags and
  /// the time-to-solve columns are unaffected; only trailing evaluations are
  /// skipped.
  bool stop_when_solved = false;
  OptimizerConfig optimizer;

  /// Throws ConfigError (unknown function, a > b, no seeds, ...).
  void validate() const;
  std::size_t budget_for(std::size_t n) const;
};

struct RunRecord {
  std::string function;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::rbf;
  std::size_t workers = 1;
  std::size_t evaluations = 0;
  double best = 0.0;
  double gap = 0.0;
  bool solved_1pct = false;
  bool solved_01pct = false;
  std::optional<double> time_to_1pct_s;
  std::optional<double> time_to_01pct_s;
  double wall_s = 0.0;
  std::vector<double> trace;
};

/// One row of the scaling table. Mean times are over the (function, seed)
/// pairs solved at that tolerance by every worker count.
struct ScalingRow {
  std::size_t workers = 1;
  std::size_t runs = 0;
  std::size_t solved_1pct = 0;
  std::size_t solved_01pct = 0;
  std::size_t common_1pct = 0;
  std::size_t common_01pct = 0;
  std::optional<double> mean_time_1pct_s;
  std::optional<double> mean_time_01pct_s;
  std::optional<double> speedup_1pct;
  std::optional<double> speedup_01pct;
};

struct FunctionComparison {
  std::string function;
  std::vector<std::vector<std::size_t>> count_better;  // algorithms x algorithms
  stats::FriedmanResult friedman;
};

struct ComparisonReport {
  std::vector<Algorithm> algorithms;
  std::vector<RunRecord> runs;
  std::vector<ScalingRow> scaling;                 // rbf runs only
  std::vector<FunctionComparison> per_function;    // when >= 2 algorithms
  std::vector<std::vector<std::size_t>> count_better;  // over all (function, seed)
};

/// Wraps an objective with a sleep drawn uniformly from [lo_ms, hi_ms]. The
/// draw is a deterministic function of the point and the seed.
Objective with_latency(Objective f, double lo_ms, double hi_ms, std::uint64_t seed);

/// A single run; the optimum is looked up from the suite.
RunRecord run_one(const BenchSpec& spec, const std::string& function, std::uint64_t seed,
                  Algorithm algorithm, std::size_t workers);

/// Aggregates runs into the scaling and comparison tables.
ComparisonReport summarize(const BenchSpec& spec, std::vector<RunRecord> runs);

/// Every (function, seed, algorithm, worker count) combination. Progress
/// lines go to `progress` when given.
ComparisonReport run_bench(const BenchSpec& spec, std::ostream* progress = nullptr);

io::json report_json(const ComparisonReport& r);
std::string format_report(const ComparisonReport& r);

}  // namespace rbfsearch::bench
