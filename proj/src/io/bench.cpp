#include "rbfsearch/io/bench.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "rbfsearch/io/random_search.hpp"
#include "rbfsearch/io/testfns.hpp"
#include "rbfsearch/scheduler.hpp"

namespace rbfsearch::bench {

std::string_view to_string(Algorithm a) {
  return a == Algorithm::rbf ? "rbf" : "random_search";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "rbf") return Algorithm::rbf;
  if (s == "random_search" || s == "rs") return Algorithm::random_search;
  throw ConfigError(fmt::format("unknown algorithm '{}'", s));
}

void BenchSpec::validate() const {
  if (functions.empty()) throw ConfigError("bench needs at least one function");
  for (const auto& f : functions) testfns::get(f);
  if (seeds < 1) throw ConfigError("bench needs at least one seed");
  if (worker_counts.empty()) throw ConfigError("bench needs at least one worker count");
  for (auto w : worker_counts)
    if (w < 1) throw ConfigError("worker counts must be at least 1");
  if (algorithms.empty()) throw ConfigError("bench needs at least one algorithm");
  if (latency_lo_ms < 0.0 || latency_lo_ms > latency_hi_ms)
    throw ConfigError(fmt::format("invalid latency range [{}, {}]", latency_lo_ms,
                                  latency_hi_ms));
  if (!fixed_budget && budget_per_dim < 1) throw ConfigError("budget rule gives zero evaluations");
}

std::size_t BenchSpec::budget_for(std::size_t n) const {
  return fixed_budget ? *fixed_budget : budget_per_dim * (n + 1);
}

Objective with_latency(Objective f, double lo_ms, double hi_ms, std::uint64_t seed) {
  if (hi_ms <= 0.0) return f;
  return [f = std::move(f), lo_ms, hi_ms, seed](std::span<const double> x) {
    std::uint64_t h = 0;
    for (double v : x) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
    RngStream rng(seed, "latency", h);
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(rng.uniform(lo_ms, hi_ms)));
    return f(x);
  };
}

namespace {

double solve_threshold(double optimum, double tol) {
  // the tiny shrink keeps "value <= threshold" consistent with gap <= tol
  if (std::fabs(optimum) < 1e-8) return optimum + tol * (1.0 - 1e-9);
  return optimum + tol * (1.0 - 1e-9) * std::fabs(optimum);
}

}  // namespace

RunRecord run_one(const BenchSpec& spec, const std::string& function, std::uint64_t seed,
                  Algorithm algorithm, std::size_t workers) {
  const auto tf = testfns::get(function);
  const BoxDomain domain = tf.domain();
  const ObjectiveSense sense{Sense::minimize};
  Budget budget;
  budget.max_evaluations = spec.budget_for(tf.dim());
  if (spec.stop_when_solved) budget.target_value = solve_threshold(tf.optimum, 1e-3);
  const Objective f = with_latency(tf.f, spec.latency_lo_ms, spec.latency_hi_ms, seed);

  OptimizationResult res;
  if (algorithm == Algorithm::random_search)
    res = random_search(f, domain, sense, budget, seed);
  else if (workers == 1)
    res = optimize(f, domain, sense, budget, spec.optimizer, seed);
  else
    res = run_parallel(f, domain, sense, budget, spec.optimizer, workers, seed).result;

  RunRecord r;
  r.function = function;
  r.n = tf.dim();
  r.seed = seed;
  r.algorithm = algorithm;
  r.workers = workers;
  r.evaluations = res.evaluations.size();
  r.best = res.best_value;
  r.gap = testfns::optimality_gap(res.best_value, tf.optimum);
  r.solved_1pct = testfns::solved(res.best_value, tf.optimum, 1e-2);
  r.solved_01pct = testfns::solved(res.best_value, tf.optimum, 1e-3);
  r.wall_s = res.elapsed_ms / 1000.0;
  r.trace = best_so_far_trace(res);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const double t = res.evaluations[i].t_wall_ms / 1000.0;
    if (!r.time_to_1pct_s && testfns::solved(r.trace[i], tf.optimum, 1e-2)) r.time_to_1pct_s = t;
    if (!r.time_to_01pct_s && testfns::solved(r.trace[i], tf.optimum, 1e-3)) {
      r.time_to_01pct_s = t;
      break;
    }
  }
  return r;
}

ComparisonReport summarize(const BenchSpec& spec, std::vector<RunRecord> runs) {
  ComparisonReport rep;
  rep.algorithms = spec.algorithms;
  rep.runs = std::move(runs);

  // scaling table over rbf runs
  using Key = std::pair<std::string, std::uint64_t>;
  std::map<std::size_t, std::map<Key, const RunRecord*>> by_workers;
  for (const auto& r : rep.runs)
    if (r.algorithm == Algorithm::rbf) by_workers[r.workers][{r.function, r.seed}] = &r;

  if (!by_workers.empty()) {
    auto common = [&](auto solved) {
      std::set<Key> keys;
      bool first = true;
      for (const auto& [w, m] : by_workers) {
        std::set<Key> s;
        for (const auto& [k, r] : m)
          if (solved(*r)) s.insert(k);
        if (first) {
          keys = std::move(s);
          first = false;
        } else {
          std::set<Key> both;
          std::set_intersection(keys.begin(), keys.end(), s.begin(), s.end(),
                                std::inserter(both, both.begin()));
          keys = std::move(both);
        }
      }
      return keys;
    };
    const auto common1 = common([](const RunRecord& r) { return r.time_to_1pct_s.has_value(); });
    const auto common01 = common([](const RunRecord& r) { return r.time_to_01pct_s.has_value(); });

    auto mean_time = [](const std::map<Key, const RunRecord*>& m, const std::set<Key>& keys,
                        auto field) -> std::optional<double> {
      if (keys.empty()) return std::nullopt;
      double s = 0.0;
      for (const auto& k : keys) s += *(m.at(k)->*field);
      return s / static_cast<double>(keys.size());
    };

    for (const auto& [w, m] : by_workers) {
      ScalingRow row;
      row.workers = w;
      row.runs = m.size();
      for (const auto& [k, r] : m) {
        row.solved_1pct += r->solved_1pct ? 1 : 0;
        row.solved_01pct += r->solved_01pct ? 1 : 0;
      }
      row.common_1pct = common1.size();
      row.common_01pct = common01.size();
      row.mean_time_1pct_s = mean_time(m, common1, &RunRecord::time_to_1pct_s);
      row.mean_time_01pct_s = mean_time(m, common01, &RunRecord::time_to_01pct_s);
      rep.scaling.push_back(row);
    }
    auto base = std::find_if(rep.scaling.begin(), rep.scaling.end(),
                             [](const ScalingRow& r) { return r.workers == 1; });
    if (base != rep.scaling.end()) {
      const ScalingRow b = *base;
      for (auto& row : rep.scaling) {
        if (b.mean_time_1pct_s && row.mean_time_1pct_s && *row.mean_time_1pct_s > 0.0)
          row.speedup_1pct = row.workers == 1 ? 1.0 : *b.mean_time_1pct_s / *row.mean_time_1pct_s;
        if (b.mean_time_01pct_s && row.mean_time_01pct_s && *row.mean_time_01pct_s > 0.0)
          row.speedup_01pct =
              row.workers == 1 ? 1.0 : *b.mean_time_01pct_s / *row.mean_time_01pct_s;
      }
    }
  }

  // algorithm comparison at the first worker count
  if (rep.algorithms.size() >= 2) {
    const std::size_t w0 = spec.worker_counts.front();
    const std::size_t k = rep.algorithms.size();
    auto column = [&](Algorithm a) {
      return static_cast<std::size_t>(
          std::find(rep.algorithms.begin(), rep.algorithms.end(), a) - rep.algorithms.begin());
    };
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> table;
    for (const auto& r : rep.runs) {
      if (r.workers != w0 && r.algorithm == Algorithm::rbf) continue;
      auto& row = table[r.function][r.seed];
      row.resize(k, std::numeric_limits<double>::quiet_NaN());
      row[column(r.algorithm)] = r.best;
    }
    const ObjectiveSense sense{Sense::minimize};
    stats::Table all;
    for (const auto& fname : spec.functions) {
      auto it = table.find(fname);
      if (it == table.end()) continue;
      stats::Table values;
      for (const auto& [seed, row] : it->second) {
        if (std::any_of(row.begin(), row.end(), [](double v) { return std::isnan(v); })) continue;
        values.push_back(row);
      }
      if (values.empty()) continue;
      all.insert(all.end(), values.begin(), values.end());
      FunctionComparison fc;
      fc.function = fname;
      fc.count_better = stats::count_better_matrix(values, sense);
      if (values.size() >= 2) fc.friedman = stats::friedman(stats::rank_rows(values, sense));
      rep.per_function.push_back(std::move(fc));
    }
    rep.count_better = stats::count_better_matrix(all, sense);
  }
  return rep;
}

ComparisonReport run_bench(const BenchSpec& spec, std::ostream* progress) {
  spec.validate();
  std::vector<RunRecord> runs;
  for (const auto& fname : spec.functions) {
    for (std::size_t s = 0; s < spec.seeds; ++s) {
      const std::uint64_t seed = spec.base_seed + s;
      for (auto algo : spec.algorithms) {
        const std::vector<std::size_t> counts =
            algo == Algorithm::rbf ? spec.worker_counts
                                   : std::vector<std::size_t>{spec.worker_counts.front()};
        for (auto w : counts) {
          runs.push_back(run_one(spec, fname, seed, algo, w));
          const auto& r = runs.back();
          if (progress)
            *progress << fmt::format("{:<16} seed {:>3} {:<13} w={} best={:.8g} gap={:.3e} {:.2f}s\n",
                                     r.function, r.seed, to_string(r.algorithm), r.workers,
                                     r.best, r.gap, r.wall_s)
                      << std::flush;
        }
      }
    }
  }
  return summarize(spec, std::move(runs));
}

io::json report_json(const ComparisonReport& r) {
  using io::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  json algos = json::array();
  for (auto a : r.algorithms) algos.push_back(std::string(to_string(a)));
  j["algorithms"] = algos;

  json runs = json::array();
  for (const auto& x : r.runs) {
    json o;
    o["function"] = x.function;
    o["n"] = x.n;
    o["seed"] = x.seed;
    o["algorithm"] = std::string(to_string(x.algorithm));
    o["workers"] = x.workers;
    o["evaluations"] = x.evaluations;
    o["best"] = x.best;
    o["gap"] = x.gap;
    o["solved_1pct"] = x.solved_1pct;
    o["solved_01pct"] = x.solved_01pct;
    o["time_to_1pct_s"] = opt(x.time_to_1pct_s);
    o["time_to_01pct_s"] = opt(x.time_to_01pct_s);
    o["wall_s"] = x.wall_s;
    o["trace"] = x.trace;
    runs.push_back(std::move(o));
  }
  j["runs"] = std::move(runs);

  json scaling = json::array();
  for (const auto& s : r.scaling) {
    json o;
    o["workers"] = s.workers;
    o["runs"] = s.runs;
    o["solved_1pct"] = s.solved_1pct;
    o["solved_01pct"] = s.solved_01pct;
    o["common_1pct"] = s.common_1pct;
    o["common_01pct"] = s.common_01pct;
    o["mean_time_1pct_s"] = opt(s.mean_time_1pct_s);
    o["mean_time_01pct_s"] = opt(s.mean_time_01pct_s);
    o["speedup_1pct"] = opt(s.speedup_1pct);
    o["speedup_01pct"] = opt(s.speedup_01pct);
    scaling.push_back(std::move(o));
  }
  j["scaling"] = std::move(scaling);

  json per = json::array();
  for (const auto& f : r.per_function) {
    json o;
    o["function"] = f.function;
    o["count_better"] = f.count_better;
    o["friedman"] = {{"statistic", f.friedman.statistic},
                     {"critical_95", f.friedman.critical_95},
                     {"significant_95", f.friedman.significant_95}};
    per.push_back(std::move(o));
  }
  j["per_function"] = std::move(per);
  j["count_better"] = r.count_better;
  return j;
}

std::string format_report(const ComparisonReport& r) {
  std::string out;
  auto num = [](const std::optional<double>& v, const char* f) {
    return v ? fmt::format(fmt::runtime(f), *v) : std::string("-");
  };
  if (!r.scaling.empty()) {
    out += fmt::format("{:>7} | {:>9} {:>10} {:>8} | {:>9} {:>10} {:>8}\n", "workers",
                       "solved@1%", "time (s)", "speedup", "solved@.1%", "time (s)", "speedup");
    for (const auto& s : r.scaling)
      out += fmt::format("{:>7} | {:>4}/{:<4} {:>10} {:>8} | {:>4}/{:<4} {:>10} {:>8}\n",
                         s.workers, s.solved_1pct, s.runs, num(s.mean_time_1pct_s, "{:.3f}"),
                         num(s.speedup_1pct, "{:.2f}"), s.solved_01pct, s.runs,
                         num(s.mean_time_01pct_s, "{:.3f}"), num(s.speedup_01pct, "{:.2f}"));
    out += fmt::format("times averaged over {} (1%) and {} (0.1%) runs solved by every worker count\n",
                       r.scaling.front().common_1pct, r.scaling.front().common_01pct);
  }
  if (!r.per_function.empty()) {
    out += "\ncount-better (row at least as good as column), Friedman 95%\n";
    for (const auto& f : r.per_function) {
      out += fmt::format("{:<16} chi2={:.3f} {}\n", f.function, f.friedman.statistic,
                         f.friedman.significant_95 ? "significant" : "not significant");
      for (std::size_t i = 0; i < r.algorithms.size(); ++i) {
        out += fmt::format("  {:<14}", to_string(r.algorithms[i]));
        for (std::size_t j = 0; j < r.algorithms.size(); ++j)
          out += i == j ? fmt::format(" {:>7}", "-")
                        : fmt::format(" {:>4} ({})", f.count_better[i][j],
                                      stats::direction_marker(f.count_better, i, j));
        out += "\n";
      }
    }
  }
  return out;
}

}  // namespace rbfsearch::bench
