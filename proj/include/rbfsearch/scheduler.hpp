#pragma once

// Asynchronous parallel driver. One coordinator owns SchedulerState and
// serializes every mutation; workers run one task at a time and talk to the
// coordinator only through assignment and completion messages.
//
// Two task kinds share one queue: evaluate (type 1) always dequeues before
// propose (type 2), FIFO within a kind. An accepted proposal places a
// temporary node at its point, valued by the surrogate prediction clipped to
// the range of real values, so concurrent proposals keep their distance from
// in-flight evaluations. The temporary node is removed when the evaluation
// completes.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "rbfsearch/core.hpp"
#include "rbfsearch/engine.hpp"
#include "rbfsearch/proposer.hpp"
#include "rbfsearch/surrogate.hpp"

namespace rbfsearch {

/// Thrown by an objective to signal that the worker itself died (as opposed
/// to the evaluation failing). The task is requeued once.
class WorkerCrash : public Error {
 public:
  using Error::Error;
};

enum class TaskKind { evaluate, propose };

std::string_view to_string(TaskKind k);

struct Task {
  std::uint64_t id = 0;
  TaskKind kind = TaskKind::evaluate;
  std::uint64_t enqueued_at = 0;
  // evaluate
  Point point;  // raw
  RecordKind record_kind = RecordKind::initial_design;
  std::optional<double> weight;
  int crashes = 0;
  // propose
  std::uint64_t ticket = 0;
};

enum class EventKind {
  enqueue,
  dequeue,
  temp_create,
  temp_remove,
  eval_complete,
  node_valued,
  proposal_accepted,
  proposal_rejected,
  requeue,
  dropped,
};

std::string_view to_string(EventKind k);

/// One line of the scheduler event log. Values are in the internal
/// (minimization) sense.
struct SchedulerEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::enqueue;
  std::uint64_t task = 0;
  TaskKind task_kind = TaskKind::evaluate;
  Point point;
  std::optional<double> value;
  std::optional<double> range_lo, range_hi;  // real-value range (temp_create)
  std::optional<double> weight;
  double t_wall_ms = 0.0;
  int worker = -1;
  bool failed = false;
};

struct SchedulerStats {
  std::size_t evaluations = 0;
  std::size_t proposals = 0;
  std::size_t rejected_proposals = 0;
  std::size_t crashes = 0;
  std::size_t max_in_flight = 0;
};

/// Coordinator-owned state. Single-threaded; every method is called by the
/// coordinator only.
class SchedulerState {
 public:
  using EventSink = std::function<void(const SchedulerEvent&)>;
  using Clock = std::function<double()>;  // wall-clock milliseconds

  SchedulerState(const BoxDomain& domain, ObjectiveSense sense, const OptimizerConfig& config,
                 std::size_t workers, RunHooks hooks = {}, EventSink sink = {},
                 Clock clock = {});

  const Task& enqueue_evaluate(Point raw, RecordKind kind, std::optional<double> weight);
  const Task& enqueue_propose(std::uint64_t ticket);

  /// Oldest evaluate task if any, else oldest propose task. Moves it in flight.
  Task dequeue(int worker = -1);

  /// Removes the task's temporary node, appends a real record.
  void on_eval_complete(std::uint64_t task_id, std::optional<double> user_value);
  /// Requeues a crashed evaluation once; the second crash counts as failure.
  void on_eval_crashed(std::uint64_t task_id);

  /// Re-checks the proposal against the current nodes. Accepted: creates a
  /// temporary node valued clip(prediction, real range) and enqueues an
  /// evaluate task. Rejected: enqueues a replacement propose task with the
  /// given ticket. Returns true when accepted.
  bool on_proposal_complete(std::uint64_t task_id, const Proposal& proposal,
                            const RbfModel* model_snapshot,
                            std::optional<std::uint64_t> replacement_ticket);
  /// A propose task that ended without a usable point.
  void on_proposal_failed(std::uint64_t task_id);

  /// Drops every pending evaluate/propose task (budget or target hit).
  void drop_pending();

  void finalize_design_if_complete();

  std::size_t pending(TaskKind k) const;
  std::size_t pending() const { return queue_.size(); }
  std::size_t in_flight(TaskKind k) const;
  std::size_t in_flight() const { return in_flight_.size(); }
  std::size_t workers() const { return workers_; }

  const SearchState& search() const { return search_; }
  const NodeSet& nodes() const { return search_.nodes(); }
  const std::vector<SchedulerEvent>& events() const { return events_; }
  const SchedulerStats& stats() const { return stats_; }

 private:
  SchedulerEvent& log(EventKind kind, const Task& t, int worker = -1);
  Task& push(Task t);
  double now() const { return clock_ ? clock_() : 0.0; }

  const BoxDomain* domain_;
  std::size_t workers_;
  std::size_t design_size_;
  std::size_t design_completed_ = 0;
  SearchState search_;
  EventSink sink_;
  Clock clock_;
  std::uint64_t next_task_id_ = 1;
  std::uint64_t next_enqueue_ = 0;
  std::deque<Task> queue_;
  std::map<std::uint64_t, std::pair<Task, int>> in_flight_;
  std::vector<SchedulerEvent> events_;
  SchedulerStats stats_;
};

struct ParallelOutcome {
  OptimizationResult result;
  std::vector<SchedulerEvent> events;
  SchedulerStats stats;
};

/// Asynchronous run over `workers` threads. With workers = 1 and the same
/// seed the evaluated points equal those of the serial optimize().
ParallelOutcome run_parallel(const Objective& objective, const BoxDomain& domain,
                             ObjectiveSense sense, const Budget& budget,
                             const OptimizerConfig& config, std::size_t workers,
                             std::uint64_t master_seed, RunHooks hooks = {},
                             SchedulerState::EventSink event_sink = {});

struct AuditReport {
  std::size_t evaluations = 0;
  std::size_t duplicate_points = 0;
  std::size_t temps_created = 0;
  std::size_t surviving_temps = 0;
  std::size_t temps_out_of_range = 0;
  std::size_t priority_violations = 0;
  std::size_t fifo_violations = 0;

  bool clean() const {
    return duplicate_points == 0 && surviving_temps == 0 && temps_out_of_range == 0 &&
           priority_violations == 0 && fifo_violations == 0;
  }
};

/// Replays an event log and checks the scheduler invariants independently of
/// the scheduler's own bookkeeping.
AuditReport audit_events(const std::vector<SchedulerEvent>& events);

}  // namespace rbfsearch
