#include "rbfsearch/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "rbfsearch/design.hpp"

namespace rbfsearch {

std::string_view to_string(TaskKind k) { return k == TaskKind::evaluate ? "evaluate" : "propose"; }

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::enqueue: return "enqueue";
    case EventKind::dequeue: return "dequeue";
    case EventKind::temp_create: return "temp_create";
    case EventKind::temp_remove: return "temp_remove";
    case EventKind::eval_complete: return "eval_complete";
    case EventKind::node_valued: return "node_valued";
    case EventKind::proposal_accepted: return "proposal_accepted";
    case EventKind::proposal_rejected: return "proposal_rejected";
    case EventKind::requeue: return "requeue";
    case EventKind::dropped: return "dropped";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// SchedulerState
// ---------------------------------------------------------------------------

SchedulerState::SchedulerState(const BoxDomain& domain, ObjectiveSense sense,
                               const OptimizerConfig& config, std::size_t workers,
                               RunHooks hooks, EventSink sink, Clock clock)
    : domain_(&domain),
      workers_(workers),
      design_size_(config.design_size_for(domain.dim())),
      search_(domain, sense, config, std::move(hooks)),
      sink_(std::move(sink)),
      clock_(std::move(clock)) {
  if (workers == 0) throw ConfigError("need at least one worker");
}

SchedulerEvent& SchedulerState::log(EventKind kind, const Task& t, int worker) {
  SchedulerEvent e;
  e.seq = events_.size();
  e.kind = kind;
  e.task = t.id;
  e.task_kind = t.kind;
  e.point = t.point;
  e.weight = t.weight;
  e.worker = worker;
  e.t_wall_ms = now();
  events_.push_back(std::move(e));
  return events_.back();
}

Task& SchedulerState::push(Task t) {
  t.enqueued_at = next_enqueue_++;
  queue_.push_back(std::move(t));
  log(EventKind::enqueue, queue_.back());
  return queue_.back();
}

const Task& SchedulerState::enqueue_evaluate(Point raw, RecordKind kind,
                                             std::optional<double> weight) {
  Task t;
  t.id = next_task_id_++;
  t.kind = TaskKind::evaluate;
  t.point = std::move(raw);
  t.record_kind = kind;
  t.weight = weight;
  Task& q = push(std::move(t));
  if (sink_) sink_(events_.back());
  return q;
}

const Task& SchedulerState::enqueue_propose(std::uint64_t ticket) {
  Task t;
  t.id = next_task_id_++;
  t.kind = TaskKind::propose;
  t.ticket = ticket;
  Task& q = push(std::move(t));
  if (sink_) sink_(events_.back());
  return q;
}

Task SchedulerState::dequeue(int worker) {
  if (queue_.empty()) throw ContractError("dequeue from an empty task queue");
  auto it = std::find_if(queue_.begin(), queue_.end(),
                         [](const Task& t) { return t.kind == TaskKind::evaluate; });
  if (it == queue_.end()) it = queue_.begin();
  Task t = std::move(*it);
  queue_.erase(it);
  if (t.kind == TaskKind::propose) ++stats_.proposals;
  in_flight_.emplace(t.id, std::make_pair(t, worker));
  stats_.max_in_flight = std::max(stats_.max_in_flight, in_flight_.size());
  log(EventKind::dequeue, t, worker);
  if (sink_) sink_(events_.back());
  return t;
}

void SchedulerState::on_eval_complete(std::uint64_t task_id, std::optional<double> user_value) {
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end() || it->second.first.kind != TaskKind::evaluate)
    throw ContractError(fmt::format("completion for unknown evaluate task {}", task_id));
  const Task task = std::move(it->second.first);
  const int worker = it->second.second;
  in_flight_.erase(it);

  if (search_.mutable_nodes().remove_temporary(task.id)) {
    log(EventKind::temp_remove, task, worker);
    if (sink_) sink_(events_.back());
  }
  ++stats_.evaluations;
  const auto& rec =
      search_.record(task.point, user_value, task.record_kind, task.weight, worker, now());
  auto& e = log(EventKind::eval_complete, task, worker);
  e.failed = rec.failed;
  if (!rec.failed || search_.design_finalized()) e.value = rec.value;
  if (sink_) sink_(e);

  if (task.record_kind == RecordKind::initial_design) {
    ++design_completed_;
    finalize_design_if_complete();
  }
}

void SchedulerState::finalize_design_if_complete() {
  if (search_.design_finalized()) return;
  if (design_completed_ < design_size_ && !(queue_.empty() && in_flight_.empty())) return;
  if (search_.evaluation_count() == 0) return;
  search_.finalize_design();
  for (const auto& r : search_.records()) {
    if (!r.failed) continue;
    Task t;
    t.point = r.point;
    auto& e = log(EventKind::node_valued, t);
    e.value = r.value;
    if (sink_) sink_(e);
  }
}

void SchedulerState::on_eval_crashed(std::uint64_t task_id) {
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end() || it->second.first.kind != TaskKind::evaluate)
    throw ContractError(fmt::format("crash report for unknown evaluate task {}", task_id));
  ++stats_.crashes;
  if (it->second.first.crashes == 0) {
    Task t = std::move(it->second.first);
    const int worker = it->second.second;
    in_flight_.erase(it);
    ++t.crashes;
    log(EventKind::requeue, t, worker);
    if (sink_) sink_(events_.back());
    push(std::move(t));
    if (sink_) sink_(events_.back());
    return;
  }
  on_eval_complete(task_id, std::nullopt);
}

bool SchedulerState::on_proposal_complete(std::uint64_t task_id, const Proposal& proposal,
                                          const RbfModel* model_snapshot,
                                          std::optional<std::uint64_t> replacement_ticket) {
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end() || it->second.first.kind != TaskKind::propose)
    throw ContractError(fmt::format("completion for unknown propose task {}", task_id));
  Task task = std::move(it->second.first);
  const int worker = it->second.second;
  in_flight_.erase(it);
  task.point = proposal.point;
  task.weight = proposal.weight_used;

  // Nodes may have changed since the snapshot the proposal was computed on.
  const bool accepted =
      proposal.accepted && !proposal.point.empty() &&
      min_scaled_distance(proposal.point, search_.nodes(), *domain_) >=
          min_acceptance_distance(domain_->dim());
  if (!accepted) {
    ++stats_.rejected_proposals;
    log(EventKind::proposal_rejected, task, worker);
    if (sink_) sink_(events_.back());
    if (replacement_ticket) enqueue_propose(*replacement_ticket);
    return false;
  }
  log(EventKind::proposal_accepted, task, worker);
  if (sink_) sink_(events_.back());

  const auto [lo, hi] = search_.nodes().real_range();
  const auto scaled = scale_to_unit(proposal.point, *domain_);
  const double predicted = model_snapshot ? model_snapshot->predict(scaled) : 0.5 * (lo + hi);
  const double clipped = std::isfinite(predicted) ? std::clamp(predicted, lo, hi) : hi;

  const Task& eval = enqueue_evaluate(proposal.point, proposal.kind, proposal.weight_used);
  search_.mutable_nodes().add(scaled, clipped, /*temporary=*/true, eval.id);
  auto& e = log(EventKind::temp_create, eval, worker);
  e.value = clipped;
  e.range_lo = lo;
  e.range_hi = hi;
  if (sink_) sink_(e);
  return true;
}

void SchedulerState::on_proposal_failed(std::uint64_t task_id) {
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end() || it->second.first.kind != TaskKind::propose)
    throw ContractError(fmt::format("failure report for unknown propose task {}", task_id));
  const Task task = std::move(it->second.first);
  const int worker = it->second.second;
  in_flight_.erase(it);
  ++stats_.rejected_proposals;
  log(EventKind::proposal_rejected, task, worker);
  if (sink_) sink_(events_.back());
}

void SchedulerState::drop_pending() {
  for (const auto& t : queue_) {
    if (t.kind == TaskKind::evaluate && search_.mutable_nodes().remove_temporary(t.id)) {
      log(EventKind::temp_remove, t);
      if (sink_) sink_(events_.back());
    }
    log(EventKind::dropped, t);
    if (sink_) sink_(events_.back());
  }
  queue_.clear();
}

std::size_t SchedulerState::pending(TaskKind k) const {
  return static_cast<std::size_t>(
      std::count_if(queue_.begin(), queue_.end(), [k](const Task& t) { return t.kind == k; }));
}

std::size_t SchedulerState::in_flight(TaskKind k) const {
  return static_cast<std::size_t>(std::count_if(
      in_flight_.begin(), in_flight_.end(), [k](const auto& kv) { return kv.second.first.kind == k; }));
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

namespace {

struct Assignment {
  Task task;
  std::shared_ptr<const NodeSet> snapshot;  // propose only
  double weight = 0.0;
};

struct Completion {
  int worker = 0;
  Task task;
  std::optional<double> value;
  bool crashed = false;
  std::optional<Proposal> proposal;
  std::shared_ptr<const RbfModel> model;
  bool saturated = false;
};

class Outbox {
 public:
  void push(Completion c) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(c));
    }
    cv_.notify_one();
  }
  Completion pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty(); });
    Completion c = std::move(items_.front());
    items_.pop_front();
    return c;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Completion> items_;
};

class Worker {
 public:
  template <class Fn>
  Worker(int id, Outbox& out, Fn&& run)
      : thread_([this, id, &out, run = std::forward<Fn>(run)](std::stop_token st) {
          while (true) {
            Assignment a;
            {
              std::unique_lock lock(mu_);
              cv_.wait(lock, st, [&] { return inbox_.has_value(); });
              if (!inbox_) return;
              a = std::move(*inbox_);
              inbox_.reset();
            }
            out.push(run(id, std::move(a)));
          }
        }) {}

  void assign(Assignment a) {
    {
      std::lock_guard lock(mu_);
      inbox_ = std::move(a);
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::optional<Assignment> inbox_;
  std::jthread thread_;  // last: joins before the members above are destroyed
};

}  // namespace

ParallelOutcome run_parallel(const Objective& objective, const BoxDomain& domain,
                             ObjectiveSense sense, const Budget& budget,
                             const OptimizerConfig& config, std::size_t workers,
                             std::uint64_t master_seed, RunHooks hooks,
                             SchedulerState::EventSink event_sink) {
  if (workers == 0) throw ConfigError("need at least one worker");
  const std::size_t n = domain.dim();
  const std::size_t design_size = config.design_size_for(n);
  budget.validate(design_size);
  config.ga.validate(n);
  const WeightCycle cycle(config.weights);

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed_ms = [start] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  SchedulerState st(domain, sense, config, workers, std::move(hooks), std::move(event_sink),
                    elapsed_ms);
  RngStream design_rng(master_seed, "design");
  for (auto& p : latin_hypercube(domain, design_size, design_rng).points)
    st.enqueue_evaluate(std::move(p), RecordKind::initial_design, std::nullopt);

  auto run_task = [&](int worker, Assignment a) {
    Completion c;
    c.worker = worker;
    if (a.task.kind == TaskKind::evaluate) {
      try {
        const double v = objective(a.task.point);
        if (std::isfinite(v)) c.value = v;
      } catch (const WorkerCrash&) {
        c.crashed = true;
      } catch (const std::exception&) {
      }
    } else {
      auto model = try_fit(*a.snapshot, config.kernel, config.value_clipping);
      if (model) c.model = std::make_shared<const RbfModel>(std::move(*model));
      RngStream rng(master_seed, "proposer", a.task.ticket);
      try {
        c.proposal = propose(c.model.get(), *a.snapshot, domain, a.weight, config.ga, rng);
      } catch (const ProposerError&) {
        c.saturated = true;
      }
    }
    c.task = std::move(a.task);
    return c;
  };

  Outbox outbox;
  std::vector<std::unique_ptr<Worker>> pool;
  std::vector<int> idle;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.push_back(std::make_unique<Worker>(static_cast<int>(w), outbox, run_task));
    idle.push_back(static_cast<int>(workers - 1 - w));
  }

  std::optional<StopReason> stopping;
  bool saturated = false;
  std::uint64_t next_ticket = 0;
  auto committed = [&] {
    return st.search().evaluation_count() + st.pending(TaskKind::evaluate) +
           st.in_flight(TaskKind::evaluate) + st.pending(TaskKind::propose) +
           st.in_flight(TaskKind::propose);
  };

  while (true) {
    if (!stopping) {
      if (budget.max_evaluations && st.search().evaluation_count() >= *budget.max_evaluations)
        stopping = StopReason::evals_exhausted;
      else if (budget.max_seconds && elapsed_ms() >= *budget.max_seconds * 1000.0)
        stopping = StopReason::time_exhausted;
      else if (st.search().target_reached(budget))
        stopping = StopReason::target_reached;
    }
    // proposals still in flight when the run stops may enqueue evaluations
    if (stopping) st.drop_pending();

    while (!stopping && !idle.empty()) {
      if (st.pending() == 0) {
        const bool room = !budget.max_evaluations || committed() < *budget.max_evaluations;
        if (st.search().design_finalized() && !saturated && room)
          st.enqueue_propose(next_ticket++);
        else
          break;
      }
      const int w = idle.back();
      idle.pop_back();
      Assignment a;
      a.task = st.dequeue(w);
      if (a.task.kind == TaskKind::propose) {
        a.snapshot = std::make_shared<const NodeSet>(st.nodes());
        a.weight = cycle.at(a.task.ticket);
      }
      pool[static_cast<std::size_t>(w)]->assign(std::move(a));
    }

    if (st.in_flight() == 0 && (stopping || st.pending() == 0)) break;

    Completion c = outbox.pop();
    idle.push_back(c.worker);
    if (c.task.kind == TaskKind::evaluate) {
      if (c.crashed)
        st.on_eval_crashed(c.task.id);
      else
        st.on_eval_complete(c.task.id, c.value);
    } else if (c.saturated) {
      st.on_proposal_failed(c.task.id);
      saturated = true;
    } else {
      std::optional<std::uint64_t> replacement;
      if (!stopping) replacement = next_ticket;
      if (!st.on_proposal_complete(c.task.id, *c.proposal, c.model.get(), replacement) &&
          replacement)
        ++next_ticket;
    }
  }
  st.finalize_design_if_complete();

  StopReason why = StopReason::evals_exhausted;
  if (stopping)
    why = *stopping;
  else if (saturated)
    why = StopReason::proposer_saturated;
  if (budget.max_evaluations && st.search().evaluation_count() >= *budget.max_evaluations)
    why = StopReason::evals_exhausted;

  ParallelOutcome out{st.search().result(why, elapsed_ms()), st.events(), st.stats()};
  return out;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

AuditReport audit_events(const std::vector<SchedulerEvent>& events) {
  AuditReport rep;
  std::set<std::vector<double>> seen;
  std::map<std::uint64_t, int> live_temps;
  std::optional<double> lo, hi;
  std::deque<std::uint64_t> pending_eval, pending_prop;

  auto erase_id = [](std::deque<std::uint64_t>& q, std::uint64_t id) {
    q.erase(std::remove(q.begin(), q.end(), id), q.end());
  };
  auto absorb = [&](double v) {
    lo = std::min(lo.value_or(v), v);
    hi = std::max(hi.value_or(v), v);
  };

  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::enqueue:
        (e.task_kind == TaskKind::evaluate ? pending_eval : pending_prop).push_back(e.task);
        break;
      case EventKind::dequeue: {
        auto& q = e.task_kind == TaskKind::evaluate ? pending_eval : pending_prop;
        if (e.task_kind == TaskKind::propose && !pending_eval.empty()) ++rep.priority_violations;
        if (q.empty() || q.front() != e.task) ++rep.fifo_violations;
        erase_id(q, e.task);
        break;
      }
      case EventKind::dropped:
        erase_id(e.task_kind == TaskKind::evaluate ? pending_eval : pending_prop, e.task);
        break;
      case EventKind::temp_create:
        ++rep.temps_created;
        ++live_temps[e.task];
        if (!e.value || !lo || *e.value < *lo || *e.value > *hi) ++rep.temps_out_of_range;
        break;
      case EventKind::temp_remove:
        if (--live_temps[e.task] == 0) live_temps.erase(e.task);
        break;
      case EventKind::eval_complete:
        ++rep.evaluations;
        if (!seen.insert(e.point).second) ++rep.duplicate_points;
        if (e.value) absorb(*e.value);
        break;
      case EventKind::node_valued:
        if (e.value) absorb(*e.value);
        break;
      default:
        break;
    }
  }
  for (const auto& [id, count] : live_temps) rep.surviving_temps += static_cast<std::size_t>(count);
  return rep;
}

}  // namespace rbfsearch
