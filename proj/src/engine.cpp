#include "rbfsearch/engine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rbfsearch/design.hpp"

namespace rbfsearch {

void Budget::validate(std::size_t design_size) const {
  if (!max_evaluations && !max_seconds && !target_value)
    throw ConfigError("budget needs at least one stopping criterion");
  if (max_evaluations && *max_evaluations < design_size)
    throw ConfigError(fmt::format("max evaluations {} is below the initial design size {}",
                                  *max_evaluations, design_size));
  if (max_seconds && !(*max_seconds > 0.0))
    throw ConfigError("max seconds must be positive");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::evals_exhausted: return "evals_exhausted";
    case StopReason::time_exhausted: return "time_exhausted";
    case StopReason::target_reached: return "target_reached";
    case StopReason::proposer_saturated: return "proposer_saturated";
  }
  return "unknown";
}

std::string_view to_string(ValueClipping c) {
  switch (c) {
    case ValueClipping::off: return "off";
    case ValueClipping::median: return "median";
    case ValueClipping::automatic: return "auto";
  }
  return "unknown";
}

ValueClipping parse_clipping(std::string_view s) {
  if (s == "off") return ValueClipping::off;
  if (s == "median") return ValueClipping::median;
  if (s == "auto") return ValueClipping::automatic;
  throw ConfigError(fmt::format("unknown value clipping '{}' (off, median, auto)", s));
}

std::vector<double> best_so_far_trace(std::span<const double> user_values, ObjectiveSense sense) {
  std::vector<double> trace;
  trace.reserve(user_values.size());
  for (double v : user_values) {
    if (trace.empty() || sense.at_least_as_good(v, trace.back()))
      trace.push_back(v);
    else
      trace.push_back(trace.back());
  }
  return trace;
}

std::vector<double> best_so_far_trace(const OptimizationResult& result) {
  if (result.evaluations.empty()) throw ContractError("trace of an empty result");
  std::vector<double> user;
  user.reserve(result.evaluations.size());
  for (const auto& r : result.evaluations) user.push_back(result.sense.to_user(r.value));
  return best_so_far_trace(user, result.sense);
}

// ---------------------------------------------------------------------------

SearchState::SearchState(const BoxDomain& domain, ObjectiveSense sense,
                         const OptimizerConfig& config, RunHooks hooks)
    : domain_(&domain),
      sense_(sense),
      max_consecutive_failures_(config.max_consecutive_failures),
      hooks_(std::move(hooks)),
      nodes_(domain.dim()) {}

double SearchState::failure_value() const {
  const double lo = *success_min_;
  const double hi = *success_max_;
  const double span = hi > lo ? hi - lo : 1.0;
  return hi + span;
}

const EvalRecord& SearchState::record(Point raw, std::optional<double> user_value,
                                      RecordKind kind, std::optional<double> weight,
                                      int worker, double t_wall_ms) {
  EvalRecord rec;
  rec.point = std::move(raw);
  rec.kind = kind;
  rec.weight_used = weight;
  rec.worker = worker;
  rec.t_wall_ms = t_wall_ms;
  rec.sequence_id = records_.size();
  rec.failed = !user_value.has_value();

  if (user_value) {
    consecutive_failures_ = 0;
    rec.value = sense_.to_internal(*user_value);
    success_min_ = std::min(success_min_.value_or(rec.value), rec.value);
    success_max_ = std::max(success_max_.value_or(rec.value), rec.value);
    if (!best_index_ || rec.value < records_[*best_index_].value) best_index_ = records_.size();
  } else {
    ++consecutive_failures_;
    if (design_finalized_) rec.value = failure_value();
  }

  const bool pending = rec.failed && !design_finalized_;
  if (pending)
    pending_failures_.push_back(records_.size());
  else
    nodes_.add(scale_to_unit(rec.point, *domain_), rec.value);
  records_.push_back(std::move(rec));

  if (consecutive_failures_ >= max_consecutive_failures_)
    throw EngineAbort(fmt::format("{} consecutive evaluation failures", consecutive_failures_));
  if (design_finalized_ && hooks_.on_record) hooks_.on_record(records_.back(), sense_);
  return records_.back();
}

void SearchState::finalize_design() {
  if (design_finalized_) return;
  if (!success_min_) throw EngineAbort("every initial design evaluation failed");
  const double penalty = failure_value();
  for (auto i : pending_failures_) {
    records_[i].value = penalty;
    nodes_.add(scale_to_unit(records_[i].point, *domain_), penalty);
  }
  pending_failures_.clear();
  design_finalized_ = true;
  if (hooks_.on_record)
    for (const auto& r : records_) hooks_.on_record(r, sense_);
}

bool SearchState::target_reached(const Budget& b) const {
  if (!b.target_value || !best_index_) return false;
  return records_[*best_index_].value <= sense_.to_internal(*b.target_value);
}

OptimizationResult SearchState::result(StopReason why, double elapsed_ms) const {
  OptimizationResult r;
  r.sense = sense_;
  r.evaluations = records_;
  r.stopped_because = why;
  r.elapsed_ms = elapsed_ms;
  if (best_index_) {
    r.best_point = records_[*best_index_].point;
    r.best_value = sense_.to_user(records_[*best_index_].value);
  }
  return r;
}

std::optional<double> guarded_call(const Objective& f, std::span<const double> x) {
  try {
    const double v = f(x);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<double> clipped_values(const NodeSet& nodes, ValueClipping mode) {
  std::vector<double> v(nodes.values().begin(), nodes.values().end());
  if (mode == ValueClipping::off || v.empty()) return v;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double fmin = std::fabs(*mn), fmax = std::fabs(*mx);
  const bool wide = fmin > 1e-15 ? fmax / fmin > 1e3 : fmax > 1e3;
  if (mode == ValueClipping::automatic && !wide) return v;
  std::vector<double> sorted = v;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  for (auto& x : v) x = std::min(x, med);
  return v;
}

std::optional<RbfModel> try_fit(const NodeSet& nodes, Kernel kernel, ValueClipping clipping) {
  try {
    if (clipping == ValueClipping::off) return RbfModel::fit(nodes, kernel);
    return RbfModel::fit(nodes.coords(), clipped_values(nodes, clipping), nodes.dim(), kernel);
  } catch (const FitError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

OptimizationResult optimize(const Objective& objective, const BoxDomain& domain,
                            ObjectiveSense sense, const Budget& budget,
                            const OptimizerConfig& config, std::uint64_t master_seed,
                            RunHooks hooks) {
  const std::size_t n = domain.dim();
  const std::size_t design_size = config.design_size_for(n);
  budget.validate(design_size);
  config.ga.validate(n);
  const WeightCycle cycle(config.weights);

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };
  auto out_of_budget = [&](const SearchState& st) -> std::optional<StopReason> {
    if (budget.max_evaluations && st.evaluation_count() >= *budget.max_evaluations)
      return StopReason::evals_exhausted;
    if (budget.max_seconds && elapsed_ms() >= *budget.max_seconds * 1000.0)
      return StopReason::time_exhausted;
    return std::nullopt;
  };

  SearchState state(domain, sense, config, std::move(hooks));
  RngStream design_rng(master_seed, "design");
  const auto design = latin_hypercube(domain, design_size, design_rng);

  for (const auto& p : design.points) {
    if (auto stop = out_of_budget(state)) {
      if (state.evaluation_count() > 0) state.finalize_design();
      return state.result(*stop, elapsed_ms());
    }
    const auto v = guarded_call(objective, p);
    state.record(p, v, RecordKind::initial_design, std::nullopt, 0, elapsed_ms());
  }
  state.finalize_design();
  if (state.target_reached(budget)) return state.result(StopReason::target_reached, elapsed_ms());

  for (std::uint64_t ticket = 0;; ++ticket) {
    if (auto stop = out_of_budget(state)) return state.result(*stop, elapsed_ms());
    const auto model = try_fit(state.nodes(), config.kernel, config.value_clipping);
    RngStream rng(master_seed, "proposer", ticket);
    Proposal prop;
    try {
      prop = propose(model ? &*model : nullptr, state.nodes(), domain, cycle.at(ticket),
                     config.ga, rng);
    } catch (const ProposerError&) {
      return state.result(StopReason::proposer_saturated, elapsed_ms());
    }
    const auto v = guarded_call(objective, prop.point);
    state.record(prop.point, v, prop.kind, prop.weight_used, 0, elapsed_ms());
    if (state.target_reached(budget)) return state.result(StopReason::target_reached, elapsed_ms());
  }
}

}  // namespace rbfsearch
