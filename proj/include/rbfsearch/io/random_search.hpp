#pragma once

#include <cstdint>

#include "rbfsearch/engine.hpp"

namespace rbfsearch {

/// Baseline: independent uniform draws over the box (log10 dims are uniform
/// in the exponent since the box stores exponents; integer dims uniform over
/// their integer values). Uses the same failure policy and result shape as
/// optimize(); the first draw plays the role of the initial design.
OptimizationResult random_search(const Objective& objective, const BoxDomain& domain,
                                 ObjectiveSense sense, const Budget& budget,
                                 std::uint64_t master_seed, RunHooks hooks = {});

}  // namespace rbfsearch
