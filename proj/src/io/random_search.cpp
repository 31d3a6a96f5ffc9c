#include "rbfsearch/io/random_search.hpp"

#include <chrono>

#include "rbfsearch/hpo.hpp"

namespace rbfsearch {

OptimizationResult random_search(const Objective& objective, const BoxDomain& domain,
                                 ObjectiveSense sense, const Budget& budget,
                                 std::uint64_t master_seed, RunHooks hooks) {
  budget.validate(1);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  OptimizerConfig config;
  SearchState state(domain, sense, config, std::move(hooks));
  RngStream rng(master_seed, "random_search");
  StopReason why = StopReason::evals_exhausted;
  while (true) {
    if (budget.max_evaluations && state.evaluation_count() >= *budget.max_evaluations) {
      why = StopReason::evals_exhausted;
      break;
    }
    if (budget.max_seconds && elapsed_ms() >= *budget.max_seconds * 1000.0) {
      why = StopReason::time_exhausted;
      break;
    }
    Point x = hpo::sample_uniform(domain, rng);
    const auto v = guarded_call(objective, x);
    state.record(std::move(x), v, RecordKind::search, std::nullopt, 0, elapsed_ms());
    if (v && !state.design_finalized()) state.finalize_design();
    if (state.target_reached(budget)) {
      why = StopReason::target_reached;
      break;
    }
  }
  if (!state.design_finalized()) state.finalize_design();  // throws if nothing succeeded
  return state.result(why, elapsed_ms());
}

}  // namespace rbfsearch
