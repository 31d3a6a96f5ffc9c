#pragma once

// Run configuration file (JSON). Schema:
//
//   {
//     "sense": "minimize" | "maximize",
//     "domain": {"lower": [..], "upper": [..], "integer": [dim, ..]},
//     "space": {"encoding": "count_variable" | "naive",
//               "params": [{"name", "kind", "low", "high", "categories"}],
//               "groups": [{"name", "max_layers", "size_low", "size_high", "size_step"}]},
//     "budget": {"max_evaluations", "max_seconds", "target_value"},
//     "workers": 1,
//     "seed": 0,
//     "optimizer": {"kernel", "weights", "design_size", "max_consecutive_failures",
//                   "ga": {"population_size", "generations", "mutation_rate",
//                          "elite_fraction", "mutation_sigma"}},
//     "evaluator": {"function": "branin"} | {"command": "...", "timeout_seconds": 60}
//   }
//
// "domain" and "space" are mutually exclusive. With a builtin function and
// neither given, the function's own box is used.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "rbfsearch/engine.hpp"
#include "rbfsearch/hpo.hpp"
#include "rbfsearch/io/runlog.hpp"

namespace rbfsearch::io {

struct EvaluatorSpec {
  std::optional<std::string> function;
  std::optional<std::string> command;
  double timeout_seconds = 60.0;
};

struct RunConfig {
  std::optional<hpo::HpoSpace> space;
  std::vector<double> lower, upper;  // raw domain when no space
  std::vector<std::size_t> integer_dims;
  ObjectiveSense sense;
  Budget budget;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  EvaluatorSpec evaluator;

  BoxDomain domain() const;
  const hpo::HpoSpace* space_ptr() const { return space ? &*space : nullptr; }
  /// Full consistency check, including the budget against the design size.
  /// Throws ConfigError.
  void validate() const;
};

hpo::HpoSpace parse_space(const json& j);
RunConfig parse_run_config(const json& j);
/// Reads and parses a config file. Throws ConfigError.
RunConfig load_run_config(const std::string& path);

/// Objective (user sense) for the configured evaluator. Builtin functions
/// take raw points; external commands receive decoded parameters.
Objective make_objective(const RunConfig& cfg);

}  // namespace rbfsearch::io
