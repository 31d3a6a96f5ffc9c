// rbfsearch command line: optimize, bench, decode.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rbfsearch/engine.hpp"
#include "rbfsearch/io/bench.hpp"
#include "rbfsearch/io/config.hpp"
#include "rbfsearch/io/testfns.hpp"
#include "rbfsearch/scheduler.hpp"

using namespace rbfsearch;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, s));
  }
}

struct OptimizeArgs {
  std::string config, output, events;
  std::optional<std::size_t> workers, max_evals;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_seconds;
};

int cmd_optimize(const OptimizeArgs& a) {
  auto cfg = io::load_run_config(a.config);
  if (a.workers) cfg.workers = *a.workers;
  if (a.seed) cfg.seed = *a.seed;
  if (a.max_evals) cfg.budget.max_evaluations = *a.max_evals;
  if (a.max_seconds) cfg.budget.max_seconds = *a.max_seconds;
  cfg.validate();

  const BoxDomain domain = cfg.domain();
  const Objective f = io::make_objective(cfg);

  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw ConfigError(fmt::format("cannot write '{}'", a.output));
  }
  std::ostream& log_out = a.output.empty() ? std::cout : file;
  std::ostream& summary = a.output.empty() ? std::cerr : std::cout;
  io::ResultLog log(log_out, cfg.space_ptr());

  std::ofstream events;
  SchedulerState::EventSink sink;
  if (!a.events.empty()) {
    events.open(a.events);
    if (!events) throw ConfigError(fmt::format("cannot write '{}'", a.events));
    sink = [&events](const SchedulerEvent& e) { events << io::event_json(e).dump() << '\n'; };
  }

  OptimizationResult res;
  if (cfg.workers == 1 && !sink)
    res = optimize(f, domain, cfg.sense, cfg.budget, cfg.optimizer, cfg.seed, log.hooks());
  else
    res = run_parallel(f, domain, cfg.sense, cfg.budget, cfg.optimizer, cfg.workers, cfg.seed,
                       log.hooks(), sink)
              .result;

  summary << fmt::format("evaluations: {}\nstopped: {}\nbest value: {:.12g}\nbest point: [{}]\n",
                         res.evaluations.size(), to_string(res.stopped_because), res.best_value,
                         fmt::join(res.best_point, ", "));
  if (cfg.space)
    summary << "best params: " << io::params_json(res.best_point, cfg.space_ptr()).dump() << '\n';
  return 0;
}

struct BenchArgs {
  std::string suite = "dixon_szego", functions, workers = "1", latency = "0:0", output;
  std::string algorithms = "rbf";
  std::size_t seeds = 5;
  std::uint64_t base_seed = 1;
  std::optional<std::size_t> budget;
  bool stop_when_solved = false;
};

int cmd_bench(const BenchArgs& a) {
  bench::BenchSpec spec;
  spec.functions = a.functions.empty() ? testfns::suite(a.suite) : split(a.functions, ',');
  spec.seeds = a.seeds;
  spec.base_seed = a.base_seed;
  spec.worker_counts.clear();
  for (const auto& w : split(a.workers, ',')) {
    const double v = to_double(w, "--workers");
    if (v < 1 || v != std::floor(v)) throw ConfigError(fmt::format("bad worker count '{}'", w));
    spec.worker_counts.push_back(static_cast<std::size_t>(v));
  }
  const auto lat = split(a.latency, ':');
  if (lat.size() != 2) throw ConfigError("--latency-ms expects A:B");
  spec.latency_lo_ms = to_double(lat[0], "--latency-ms");
  spec.latency_hi_ms = to_double(lat[1], "--latency-ms");
  spec.algorithms.clear();
  for (const auto& s : split(a.algorithms, ',')) spec.algorithms.push_back(bench::parse_algorithm(s));
  spec.fixed_budget = a.budget;
  spec.stop_when_solved = a.stop_when_solved;
  spec.validate();

  const auto report = bench::run_bench(spec, &std::cerr);
  std::cout << bench::format_report(report);
  if (!a.output.empty()) {
    std::ofstream out(a.output);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", a.output));
    out << bench::report_json(report).dump(1) << '\n';
  }
  return 0;
}

int cmd_decode(const std::string& config, const std::string& point) {
  const auto cfg = io::load_run_config(config);
  std::vector<double> x;
  for (const auto& s : split(point, ',')) x.push_back(to_double(s, "--point"));
  const BoxDomain d = cfg.domain();
  if (x.size() != d.dim())
    throw ConfigError(fmt::format("point has {} values, the space has {} dims", x.size(), d.dim()));
  if (!d.contains(x, 1e-12)) throw ConfigError("point lies outside the box");
  std::cout << io::params_json(x, cfg.space_ptr()).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-based global optimization of expensive black-box functions"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "run the optimizer on a config file");
  optimize_cmd->add_option("--config", opt.config, "run configuration (JSON)")->required();
  optimize_cmd->add_option("--workers", opt.workers, "parallel workers");
  optimize_cmd->add_option("--seed", opt.seed, "master seed");
  optimize_cmd->add_option("--max-evals", opt.max_evals, "evaluation budget");
  optimize_cmd->add_option("--max-seconds", opt.max_seconds, "wall-clock budget");
  optimize_cmd->add_option("--output", opt.output, "result log path (default: stdout)");
  optimize_cmd->add_option("--events", opt.events, "scheduler event log path");

  BenchArgs b;
  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark suite");
  bench_cmd->add_option("--suite", b.suite, "suite name (dixon_szego, small)");
  bench_cmd->add_option("--functions", b.functions, "comma-separated functions (overrides suite)");
  bench_cmd->add_option("--workers", b.workers, "comma-separated worker counts");
  bench_cmd->add_option("--seeds", b.seeds, "seeds per function");
  bench_cmd->add_option("--base-seed", b.base_seed, "first seed");
  bench_cmd->add_option("--latency-ms", b.latency, "simulated latency range A:B");
  bench_cmd->add_option("--algorithms", b.algorithms, "rbf,random_search");
  bench_cmd->add_option("--budget", b.budget, "fixed evaluation budget (default 60(n+1))");
  bench_cmd->add_flag("--stop-when-solved", b.stop_when_solved, "stop runs within 0.1%");
  bench_cmd->add_option("--output", b.output, "JSON report path");

  std::string dec_config, dec_point;
  auto* decode_cmd = app.add_subcommand("decode", "decode a box point into a configuration");
  decode_cmd->add_option("--config", dec_config, "run configuration (JSON)")->required();
  decode_cmd->add_option("--point", dec_point, "comma-separated coordinates")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*optimize_cmd) return cmd_optimize(opt);
    if (*bench_cmd) return cmd_bench(b);
    if (*decode_cmd) return cmd_decode(dec_config, dec_point);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
