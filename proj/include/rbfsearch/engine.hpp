#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rbfsearch/core.hpp"
#include "rbfsearch/proposer.hpp"
#include "rbfsearch/surrogate.hpp"

namespace rbfsearch {

/// Raised when the run cannot continue (every design point failed, or too
/// many consecutive evaluation failures).
class EngineAbort : public Error {
 public:
  using Error::Error;
};

/// Objective in the user's sense at a raw point. Throwing, or returning a
/// non-finite value, marks the evaluation as failed.
using Objective = std::function<double(std::span<const double>)>;

struct Budget {
  std::optional<std::size_t> max_evaluations;
  std::optional<double> max_seconds;
  std::optional<double> target_value;  // user sense

  void validate(std::size_t design_size) const;
};

/// Values above the median are replaced by the median before fitting.
/// automatic does so only when |max| / |min| exceeds 1e3.
enum class ValueClipping { off, median, automatic };

std::string_view to_string(ValueClipping c);
ValueClipping parse_clipping(std::string_view s);

struct OptimizerConfig {
  Kernel kernel = Kernel::thin_plate_spline;
  ValueClipping value_clipping = ValueClipping::automatic;
  std::vector<double> weights = WeightCycle::default_weights();
  GaConfig ga;
  std::size_t design_size = 0;  // 0: n + 1
  std::size_t max_consecutive_failures = 10;

  std::size_t design_size_for(std::size_t n) const { return design_size ? design_size : n + 1; }
};

enum class StopReason { evals_exhausted, time_exhausted, target_reached, proposer_saturated };

std::string_view to_string(StopReason r);

struct OptimizationResult {
  Point best_point;  // raw coordinates
  double best_value = 0.0;  // user sense
  std::vector<EvalRecord> evaluations;  // values in internal sense
  StopReason stopped_because = StopReason::evals_exhausted;
  ObjectiveSense sense;
  double elapsed_ms = 0.0;
};

/// Entry t is the best user-sense value among the first t+1 evaluations.
std::vector<double> best_so_far_trace(const OptimizationResult& result);
std::vector<double> best_so_far_trace(std::span<const double> user_values, ObjectiveSense sense);

/// Callbacks invoked in sequence order from the thread that owns the run.
struct RunHooks {
  std::function<void(const EvalRecord&, ObjectiveSense)> on_record;
};

/// Bookkeeping shared by the serial and the parallel driver: the node set,
/// the record list, best-so-far and the failed-evaluation policy.
///
/// A failed evaluation is valued max + (max - min) over the successful values
/// known at that moment (span 1.0 when degenerate). Failures during the
/// initial design are valued once the whole design is in. Records produced
/// during the design are emitted to hooks together, in sequence order, once
/// the design is finalized.
class SearchState {
 public:
  SearchState(const BoxDomain& domain, ObjectiveSense sense, const OptimizerConfig& config,
              RunHooks hooks = {});

  const BoxDomain& domain() const { return *domain_; }
  ObjectiveSense sense() const { return sense_; }
  const NodeSet& nodes() const { return nodes_; }
  NodeSet& mutable_nodes() { return nodes_; }
  const std::vector<EvalRecord>& records() const { return records_; }
  std::size_t evaluation_count() const { return records_.size(); }
  bool design_finalized() const { return design_finalized_; }

  /// Stores a completed evaluation. user_value empty means failure.
  const EvalRecord& record(Point raw, std::optional<double> user_value, RecordKind kind,
                           std::optional<double> weight, int worker, double t_wall_ms);

  /// Values pending design failures and emits the buffered design records.
  void finalize_design();

  bool target_reached(const Budget& b) const;
  OptimizationResult result(StopReason why, double elapsed_ms) const;

 private:
  double failure_value() const;

  const BoxDomain* domain_;
  ObjectiveSense sense_;
  std::size_t max_consecutive_failures_;
  RunHooks hooks_;
  NodeSet nodes_;
  std::vector<EvalRecord> records_;
  std::vector<std::size_t> pending_failures_;
  bool design_finalized_ = false;
  std::size_t consecutive_failures_ = 0;
  std::optional<double> success_min_, success_max_;
  std::optional<std::size_t> best_index_;
};

/// Calls the objective and converts exceptions and non-finite values into
/// std::nullopt.
std::optional<double> guarded_call(const Objective& f, std::span<const double> x);

/// Node values as handed to the surrogate under the given clipping mode.
std::vector<double> clipped_values(const NodeSet& nodes, ValueClipping mode);
/// Fits the surrogate over the current nodes; nullopt when the fit fails.
std::optional<RbfModel> try_fit(const NodeSet& nodes, Kernel kernel,
                                ValueClipping clipping = ValueClipping::automatic);

/// Serial loop: Latin hypercube design, then fit / propose / evaluate until a
/// stopping criterion fires. Budget is checked before each evaluation.
OptimizationResult optimize(const Objective& objective, const BoxDomain& domain,
                            ObjectiveSense sense, const Budget& budget,
                            const OptimizerConfig& config, std::uint64_t master_seed,
                            RunHooks hooks = {});

}  // namespace rbfsearch
