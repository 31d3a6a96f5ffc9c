// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rbfsearch/design.hpp"
#include "rbfsearch/hpo.hpp"
#include "rbfsearch/io/bench.hpp"
#include "rbfsearch/io/config.hpp"
#include "rbfsearch/io/runlog.hpp"
#include "rbfsearch/io/stats.hpp"
#include "rbfsearch/io/testfns.hpp"
#include "rbfsearch/scheduler.hpp"
#include "rbfsearch/surrogate.hpp"

using namespace rbfsearch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

Point random_unit_point(RngStream& rng, std::size_t n) {
  Point p(n);
  for (auto& v : p) v = rng.uniform();
  return p;
}

// 1. interpolation residuals and affine reproduction
Outcome surrogate_exactness() {
  RngStream rng(101, "acceptance.surrogate");
  double worst_resid = 0.0, worst_affine = 0.0;
  std::size_t regularized = 0, sets = 0;
  while (sets < 50) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const auto k = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(n) + 1, 40));
    std::vector<double> coords;
    for (std::size_t i = 0; i < k; ++i) {
      const auto p = random_unit_point(rng, n);
      coords.insert(coords.end(), p.begin(), p.end());
    }
    if (!is_poised(coords, n)) continue;
    ++sets;

    std::vector<double> values(k);
    for (auto& v : values) v = rng.uniform(-100.0, 100.0);
    const auto m = RbfModel::fit(coords, values, n);
    regularized += m.regularization_used() != 0.0 ? 1 : 0;
    const double scale = std::max(1.0, std::ranges::max(values, {}, [](double v) { return std::fabs(v); }));
    for (std::size_t i = 0; i < k; ++i)
      worst_resid = std::max(worst_resid,
                             std::fabs(m.predict({coords.data() + i * n, n}) - values[i]) / scale);

    Point a(n);
    for (auto& v : a) v = rng.uniform(-5.0, 5.0);
    const double b = rng.uniform(-5.0, 5.0);
    auto affine = [&](std::span<const double> x) {
      return std::inner_product(a.begin(), a.end(), x.begin(), b);
    };
    std::vector<double> av(k);
    for (std::size_t i = 0; i < k; ++i) av[i] = affine({coords.data() + i * n, n});
    const auto ma = RbfModel::fit(coords, av, n);
    regularized += ma.regularization_used() != 0.0 ? 1 : 0;
    const double ascale = std::max(1.0, std::ranges::max(av, {}, [](double v) { return std::fabs(v); }));
    for (int t = 0; t < 100; ++t) {
      const auto x = random_unit_point(rng, n);
      worst_affine = std::max(worst_affine, std::fabs(ma.predict(x) - affine(x)) / ascale);
    }
  }
  return {worst_resid <= 1e-6 && worst_affine <= 1e-6 && regularized == 0,
          fmt::format("50 sets, max residual {:.2e}, max affine error {:.2e}, regularized fits {}",
                      worst_resid, worst_affine, regularized)};
}

// 2. Latin hypercube stratification and rank
Outcome lhs_properties() {
  RngStream rng(102, "acceptance.lhs");
  std::size_t stratified_ok = 0, rank_ok = 0, returned = 0, thrown = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(1 + t % 8);
    const auto k = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(n) + 1, 4 * static_cast<std::int64_t>(n + 1)));
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = rng.uniform(-10.0, 10.0);
      hi[i] = lo[i] + rng.uniform(0.1, 20.0);
    }
    const BoxDomain d(lo, hi);
    InitialDesign des;
    try {
      des = latin_hypercube(d, k, rng);
    } catch (const DesignError&) {
      ++thrown;
      continue;
    }
    ++returned;
    rank_ok += des.rank_ok ? 1 : 0;
    bool ok = des.points.size() == k && des.stratified.size() == k;
    for (std::size_t j = 0; ok && j < n; ++j) {
      std::vector<int> hits(k, 0);
      for (std::size_t i = 0; i < k; ++i) {
        const double s = des.stratified[i][j];
        const double u = scale_to_unit(des.points[i], d)[j];
        if (std::fabs(u - s) > 1e-9 || s < 0.0 || s >= 1.0) {
          ok = false;
          break;
        }
        ++hits[static_cast<std::size_t>(std::floor(s * static_cast<double>(k)))];
      }
      ok = ok && std::ranges::all_of(hits, [](int h) { return h == 1; });
    }
    stratified_ok += ok ? 1 : 0;
  }
  return {returned == 1000 && stratified_ok == returned && rank_ok == returned,
          fmt::format("{} designs returned ({} errors), stratified {}, rank_ok {}", returned, thrown,
                      stratified_ok, rank_ok)};
}

// 3. serial convergence on the desk suite
Outcome serial_convergence() {
  bench::BenchSpec spec;
  spec.functions = testfns::suite("dixon_szego");
  spec.seeds = 20;
  spec.stop_when_solved = true;
  std::size_t runs = 0, s1 = 0, s01 = 0;
  std::string per;
  for (const auto& f : spec.functions) {
    std::size_t f1 = 0;
    for (std::size_t s = 0; s < spec.seeds; ++s) {
      const auto r = bench::run_one(spec, f, spec.base_seed + s, bench::Algorithm::rbf, 1);
      ++runs;
      s1 += r.solved_1pct;
      s01 += r.solved_01pct;
      f1 += r.solved_1pct;
    }
    per += fmt::format(" {}={}", f, f1);
  }
  const double p1 = static_cast<double>(s1) / static_cast<double>(runs);
  const double p01 = static_cast<double>(s01) / static_cast<double>(runs);
  return {p1 >= 0.60 && p01 >= 0.50,
          fmt::format("{} runs, within 1%: {} ({:.1f}%), within 0.1%: {} ({:.1f}%); per function at 1%:{}",
                      runs, s1, 100 * p1, s01, 100 * p01, per)};
}

// 4. surrogate vs random search at 100 evaluations
Outcome beats_random_search() {
  bench::BenchSpec spec;
  const auto all = testfns::suite("dixon_szego");
  spec.functions.assign(all.begin(), all.begin() + 5);
  spec.seeds = 20;
  spec.fixed_budget = 100;
  spec.algorithms = {bench::Algorithm::rbf, bench::Algorithm::random_search};
  const auto rep = bench::run_bench(spec);
  std::size_t paired = 0, as_good = 0;
  for (const auto& r : rep.runs) {
    if (r.algorithm != bench::Algorithm::rbf) continue;
    for (const auto& q : rep.runs)
      if (q.algorithm == bench::Algorithm::random_search && q.function == r.function &&
          q.seed == r.seed) {
        ++paired;
        as_good += r.best <= q.best ? 1 : 0;
      }
  }
  std::size_t significant = 0;
  std::string per;
  for (const auto& f : rep.per_function) {
    significant += f.friedman.significant_95 ? 1 : 0;
    per += fmt::format(" {}={}/{} chi2={:.2f}", f.function, f.count_better[0][1],
                       f.count_better[0][0], f.friedman.statistic);
  }
  const double frac = static_cast<double>(as_good) / static_cast<double>(paired);
  return {paired == 100 && frac >= 0.65 && significant >= 3,
          fmt::format("at least as good in {}/{} ({:.0f}%), Friedman significant on {}/5;{}", as_good,
                      paired, 100 * frac, significant, per)};
}

// 5. wall-clock speedup under simulated latency
Outcome parallel_speedup() {
  bench::BenchSpec spec;
  spec.functions = testfns::suite("small");
  spec.seeds = 5;
  spec.worker_counts = {1, 2, 4, 8};
  spec.latency_lo_ms = 50;
  spec.latency_hi_ms = 100;
  spec.stop_when_solved = true;
  const auto rep = bench::run_bench(spec);
  std::vector<double> sp;
  std::string rows;
  for (const auto& row : rep.scaling) {
    sp.push_back(row.speedup_1pct.value_or(0.0));
    rows += fmt::format(" w={}: {:.2f}x ({}/{} solved)", row.workers, sp.back(), row.solved_1pct,
                        row.runs);
  }
  bool monotone = sp.size() == 4;
  for (std::size_t i = 1; monotone && i < sp.size(); ++i) monotone = sp[i] >= 0.9 * sp[i - 1];
  const bool pass = sp.size() == 4 && sp[3] >= 2.0 && sp[1] >= 1.3 && monotone;
  return {pass, fmt::format("time to 1% over {} common runs:{}{}",
                            rep.scaling.empty() ? 0 : rep.scaling.front().common_1pct, rows,
                            monotone ? "" : " (not monotone)")};
}

// 6. scheduler audit over parallel runs
Outcome parallel_audit() {
  const auto fns = testfns::suite("dixon_szego");
  std::size_t clean = 0, temps = 0, evals = 0;
  AuditReport total;
  for (std::uint64_t run = 0; run < 50; ++run) {
    const auto tf = testfns::get(fns[run % fns.size()]);
    Budget b;
    b.max_evaluations = 10 * (tf.dim() + 1) + 20;
    const auto f = bench::with_latency(tf.f, 0.5, 4.0, run);
    const auto out = run_parallel(f, tf.domain(), {}, b, {}, 8, 1000 + run);
    const auto rep = audit_events(out.events);
    clean += rep.clean() && rep.evaluations == *b.max_evaluations ? 1 : 0;
    temps += rep.temps_created;
    evals += rep.evaluations;
    total.duplicate_points += rep.duplicate_points;
    total.surviving_temps += rep.surviving_temps;
    total.temps_out_of_range += rep.temps_out_of_range;
    total.priority_violations += rep.priority_violations;
    total.fifo_violations += rep.fifo_violations;
  }
  return {clean == 50 && temps > 0,
          fmt::format("{}/50 clean, {} evaluations, {} temporary nodes; duplicates {}, surviving "
                      "temps {}, out of range {}, priority violations {}",
                      clean, evals, temps, total.duplicate_points, total.surviving_temps,
                      total.temps_out_of_range, total.priority_violations)};
}

// 7. byte-identical serial logs
Outcome determinism() {
  auto run = [](std::uint64_t seed) {
    const auto cfg = io::parse_run_config(io::json::parse(
        R"({"budget": {"max_evaluations": 80}, "evaluator": {"function": "hartman3"}})"));
    std::ostringstream out;
    io::ResultLog log(out, nullptr, false);
    optimize(io::make_objective(cfg), cfg.domain(), cfg.sense, cfg.budget, cfg.optimizer, seed,
             log.hooks());
    return out.str();
  };
  auto run_hpo = [] {
    const auto cfg = io::parse_run_config(io::json::parse(R"({
      "space": {"params": [{"name": "lr", "kind": "log10_continuous", "low": -4, "high": -1}],
                "groups": [{"name": "h", "max_layers": 3, "size_low": 10, "size_high": 200, "size_step": 10}]},
      "budget": {"max_evaluations": 40}, "evaluator": {"function": "sphere5"}, "seed": 3})"));
    std::ostringstream out;
    io::ResultLog log(out, cfg.space_ptr(), false);
    optimize(io::make_objective(cfg), cfg.domain(), cfg.sense, cfg.budget, cfg.optimizer, cfg.seed,
             log.hooks());
    return out.str();
  };
  const auto a = run(5), b = run(5), c = run(6);
  const auto h1 = run_hpo(), h2 = run_hpo();
  const bool pass = !a.empty() && a == b && a != c && !h1.empty() && h1 == h2 &&
                    a.find("t_wall_ms") == std::string::npos;
  return {pass, fmt::format("logs of {} and {} bytes identical: {}, {}; other seed differs: {}",
                            a.size(), h1.size(), a == b, h1 == h2, a != c)};
}

// 8. exhaustive decode against an enumeration of valid architectures
Outcome hpo_encoding() {
  std::string detail;
  bool pass = true;
  for (auto enc : {hpo::Encoding::count_variable, hpo::Encoding::naive}) {
    hpo::HpoSpace s;
    s.encoding = enc;
    s.groups.push_back({"hidden", 2, 1, 3, 1});
    const auto d = hpo::to_domain(s);

    // oracle: every sequence of 0..u sizes from {1, 2, 3}
    std::set<std::vector<std::int64_t>> oracle{{}};
    for (std::int64_t a = 1; a <= 3; ++a) {
      oracle.insert({a});
      for (std::int64_t b = 1; b <= 3; ++b) oracle.insert({a, b});
    }

    std::set<std::vector<std::int64_t>> seen;
    std::size_t points = 0, invalid = 0;
    Point x(d.dim());
    std::function<void(std::size_t)> walk = [&](std::size_t i) {
      if (i == d.dim()) {
        ++points;
        const auto L = hpo::layers(hpo::decode(s, x), "hidden");
        const bool valid = L.size() <= 2 && std::ranges::all_of(L, [](auto v) { return v >= 1 && v <= 3; });
        invalid += valid ? 0 : 1;
        seen.insert(L);
        return;
      }
      for (double v = d.lower()[i]; v <= d.upper()[i]; v += 1.0) {
        x[i] = v;
        walk(i + 1);
      }
    };
    walk(0);
    const bool ok = invalid == 0 && seen == oracle;
    pass = pass && ok;
    detail += fmt::format("{}: {} box points -> {} of {} architectures, {} invalid; ",
                          hpo::to_string(enc), points, seen.size(), oracle.size(), invalid);
  }
  hpo::HpoSpace ex;
  ex.groups.push_back({"hidden", 5, 1, 100, 1});
  const auto L = hpo::layers(hpo::decode(ex, std::vector<double>{20, 10, 30, 10, 40, 3}), "hidden");
  const bool example = L == std::vector<std::int64_t>{20, 10, 30};
  detail += fmt::format("u=5 example decodes to [{}]", fmt::join(L, ","));
  return {pass && example, detail};
}

// 9. expected decoded size, naive vs count-variable
Outcome encoding_cost() {
  RngStream rng(109, "acceptance.cost");
  hpo::HpoSpace cv;
  cv.groups.push_back({"hidden", 4, 1, 100, 1});
  hpo::HpoSpace nv = cv;
  nv.encoding = hpo::Encoding::naive;
  const double a = hpo::expected_decoded_cost(nv, 400000, rng);
  const double b = hpo::expected_decoded_cost(cv, 400000, rng);
  const double ratio = a / b, expected = 200.0 / 101.0;
  return {std::fabs(ratio / expected - 1.0) <= 0.02,
          fmt::format("naive {:.2f}, count-variable {:.2f}, ratio {:.4f} vs {:.4f}", a, b, ratio,
                      expected)};
}

// 10. Friedman statistic and its null behaviour
Outcome friedman_checks() {
  const stats::Table same(10, std::vector{1.0, 2.0, 3.0});
  const double s = stats::friedman(same).statistic;
  RngStream rng(110, "acceptance.friedman");
  int flagged = 0;
  for (int t = 0; t < 1000; ++t) {
    stats::Table tab;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> v{rng.uniform(), rng.uniform(), rng.uniform()};
      tab.push_back(v);
    }
    flagged += stats::friedman(stats::rank_rows(tab, {})).significant_95 ? 1 : 0;
  }
  return {s == 20.0 && flagged <= 80,
          fmt::format("identical rankings give {}, null tables flagged {}/1000", s, flagged)};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "surrogate exactness", 10, surrogate_exactness},
      {2, "latin hypercube properties", 10, lhs_properties},
      {3, "serial convergence", 900, serial_convergence},
      {4, "beats random search", 600, beats_random_search},
      {5, "parallel speedup", 1200, parallel_speedup},
      {6, "parallel audit", 0, parallel_audit},
      {7, "determinism", 0, determinism},
      {8, "hpo encoding", 0, hpo_encoding},
      {9, "encoding cost", 0, encoding_cost},
      {10, "friedman statistics", 0, friedman_checks},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.contains(c.id)) continue;
    Stopwatch sw;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = sw.seconds();
    if (c.time_limit_s > 0 && secs > c.time_limit_s) {
      o.pass = false;
      o.detail += fmt::format(" [over time limit {:.0f}s]", c.time_limit_s);
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("{} criterion {:>2} {}: {} ({:.1f}s)\n", o.pass ? "PASS" : "FAIL", c.id,
                             c.name, o.detail, secs)
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
