#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <set>
#include <thread>

#include "rbfsearch/scheduler.hpp"

using namespace rbfsearch;

namespace {

double bowl(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += (v - 0.25) * (v - 0.25);
  return s;
}

Budget evals(std::size_t m) {
  Budget b;
  b.max_evaluations = m;
  return b;
}

Proposal accepted_at(Point p) {
  Proposal pr;
  pr.point = std::move(p);
  pr.accepted = true;
  pr.weight_used = 0.5;
  return pr;
}

}  // namespace

class SchedulerStateTest : public ::testing::Test {
 protected:
  BoxDomain domain{{0.0, 0.0}, {1.0, 1.0}};
  OptimizerConfig config;
  SchedulerState st{domain, ObjectiveSense{}, config, 4};

  void finish_design() {
    const std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (const auto& p : pts) st.enqueue_evaluate(p, RecordKind::initial_design, std::nullopt);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Task t = st.dequeue(0);
      st.on_eval_complete(t.id, bowl(t.point));
    }
    ASSERT_TRUE(st.search().design_finalized());
  }
};

TEST_F(SchedulerStateTest, EvaluateBeforeProposeFifoWithinKind) {
  st.enqueue_propose(0);
  st.enqueue_evaluate({0.1, 0.1}, RecordKind::initial_design, std::nullopt);
  st.enqueue_propose(1);
  st.enqueue_evaluate({0.2, 0.2}, RecordKind::initial_design, std::nullopt);
  EXPECT_EQ(st.dequeue().point, (Point{0.1, 0.1}));
  EXPECT_EQ(st.dequeue().point, (Point{0.2, 0.2}));
  EXPECT_EQ(st.dequeue().ticket, 0u);
  EXPECT_EQ(st.dequeue().ticket, 1u);
  EXPECT_THROW(st.dequeue(), ContractError);
  EXPECT_EQ(audit_events(st.events()).priority_violations, 0u);
  EXPECT_EQ(audit_events(st.events()).fifo_violations, 0u);
}

TEST_F(SchedulerStateTest, UnknownCompletionIsContractError) {
  EXPECT_THROW(st.on_eval_complete(99, 1.0), ContractError);
  EXPECT_THROW(st.on_eval_crashed(99), ContractError);
  EXPECT_THROW(st.on_proposal_failed(99), ContractError);
}

TEST_F(SchedulerStateTest, AcceptedProposalCreatesClippedTemporaryNode) {
  finish_design();
  const auto model = RbfModel::fit(st.nodes());
  st.enqueue_propose(0);
  const Task p = st.dequeue(1);
  ASSERT_TRUE(st.on_proposal_complete(p.id, accepted_at({0.6, 0.6}), &model, 1));
  EXPECT_EQ(st.nodes().temporary_count(), 1u);
  const auto [lo, hi] = st.nodes().real_range();
  const double tv = st.nodes().value(st.nodes().size() - 1);
  EXPECT_GE(tv, lo);
  EXPECT_LE(tv, hi);
  EXPECT_EQ(st.pending(TaskKind::evaluate), 1u);

  // a second proposal at the same point is rejected against the temp node
  st.enqueue_propose(1);
  const Task q = st.dequeue(2);  // evaluate first
  EXPECT_EQ(q.kind, TaskKind::evaluate);
  const Task r = st.dequeue(2);
  EXPECT_FALSE(st.on_proposal_complete(r.id, accepted_at({0.6, 0.6}), &model, 2));
  EXPECT_EQ(st.pending(TaskKind::propose), 1u);  // replacement with ticket 2

  st.on_eval_complete(q.id, 0.3);
  EXPECT_EQ(st.nodes().temporary_count(), 0u);
  const auto rep = audit_events(st.events());
  EXPECT_EQ(rep.temps_created, 1u);
  EXPECT_EQ(rep.surviving_temps, 0u);
  EXPECT_EQ(rep.temps_out_of_range, 0u);
}

TEST_F(SchedulerStateTest, WildPredictionIsClipped) {
  finish_design();
  // A model fitted to very different data predicts far outside the range.
  NodeSet other(2);
  other.add(std::vector{0.0, 0.0}, 1e6);
  other.add(std::vector{1.0, 0.0}, -1e6);
  other.add(std::vector{0.0, 1.0}, 5e5);
  const auto wild = RbfModel::fit(other);
  st.enqueue_propose(0);
  const Task p = st.dequeue();
  ASSERT_TRUE(st.on_proposal_complete(p.id, accepted_at({0.9, 0.9}), &wild, std::nullopt));
  const auto [lo, hi] = st.nodes().real_range();
  const double tv = st.nodes().value(st.nodes().size() - 1);
  EXPECT_TRUE(tv == lo || tv == hi);
}

TEST_F(SchedulerStateTest, CrashRequeuesOnceThenFails) {
  finish_design();
  st.enqueue_evaluate({0.5, 0.5}, RecordKind::search, 0.5);
  Task t = st.dequeue(0);
  st.on_eval_crashed(t.id);
  EXPECT_EQ(st.pending(TaskKind::evaluate), 1u);
  t = st.dequeue(1);
  EXPECT_EQ(t.crashes, 1);
  st.on_eval_crashed(t.id);
  EXPECT_EQ(st.pending(), 0u);
  EXPECT_TRUE(st.search().records().back().failed);
  EXPECT_EQ(st.stats().crashes, 2u);
}

TEST_F(SchedulerStateTest, DropPendingRemovesQueuedTemps) {
  finish_design();
  st.enqueue_propose(0);
  const Task p = st.dequeue();
  ASSERT_TRUE(st.on_proposal_complete(p.id, accepted_at({0.5, 0.4}), nullptr, std::nullopt));
  EXPECT_EQ(st.nodes().temporary_count(), 1u);
  st.drop_pending();
  EXPECT_EQ(st.nodes().temporary_count(), 0u);
  EXPECT_EQ(audit_events(st.events()).surviving_temps, 0u);
}

TEST(Audit, DetectsViolations) {
  std::vector<SchedulerEvent> ev;
  auto add = [&](EventKind k, std::uint64_t task, TaskKind tk, Point p = {},
                 std::optional<double> v = std::nullopt) {
    SchedulerEvent e;
    e.seq = ev.size();
    e.kind = k;
    e.task = task;
    e.task_kind = tk;
    e.point = std::move(p);
    e.value = v;
    ev.push_back(e);
  };
  add(EventKind::enqueue, 1, TaskKind::evaluate);
  add(EventKind::enqueue, 2, TaskKind::propose);
  add(EventKind::dequeue, 2, TaskKind::propose);  // evaluate 1 still pending
  add(EventKind::dequeue, 1, TaskKind::evaluate);
  add(EventKind::eval_complete, 1, TaskKind::evaluate, {0.5}, 1.0);
  add(EventKind::enqueue, 3, TaskKind::evaluate);
  add(EventKind::temp_create, 3, TaskKind::evaluate, {0.2}, 7.0);  // outside [1, 1]
  add(EventKind::enqueue, 4, TaskKind::evaluate);
  add(EventKind::dequeue, 4, TaskKind::evaluate);  // 3 is older
  add(EventKind::eval_complete, 4, TaskKind::evaluate, {0.5}, 2.0);  // duplicate point
  const auto r = audit_events(ev);
  EXPECT_EQ(r.priority_violations, 1u);
  EXPECT_EQ(r.fifo_violations, 1u);
  EXPECT_EQ(r.temps_out_of_range, 1u);
  EXPECT_EQ(r.surviving_temps, 1u);
  EXPECT_EQ(r.duplicate_points, 1u);
  EXPECT_FALSE(r.clean());
}

TEST(RunParallel, OneWorkerMatchesSerial) {
  BoxDomain d({-1.0, -1.0}, {1.0, 1.0});
  const auto serial = optimize(bowl, d, {}, evals(25), {}, 21);
  const auto par = run_parallel(bowl, d, {}, evals(25), {}, 1, 21);
  ASSERT_EQ(serial.evaluations.size(), par.result.evaluations.size());
  for (std::size_t i = 0; i < serial.evaluations.size(); ++i)
    EXPECT_EQ(serial.evaluations[i].point, par.result.evaluations[i].point) << i;
}

TEST(RunParallel, ManyWorkersAuditClean) {
  BoxDomain d({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
  auto slow = [](std::span<const double> x) {
    std::this_thread::sleep_for(std::chrono::microseconds(200 + static_cast<int>(1000 * std::fabs(x[0]))));
    return bowl(x);
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto out = run_parallel(slow, d, {}, evals(40), {}, 6, seed);
    EXPECT_EQ(out.result.evaluations.size(), 40u);
    const auto rep = audit_events(out.events);
    EXPECT_TRUE(rep.clean()) << "dups " << rep.duplicate_points << " temps "
                             << rep.surviving_temps << " range " << rep.temps_out_of_range
                             << " prio " << rep.priority_violations;
    EXPECT_EQ(rep.evaluations, 40u);
    EXPECT_GT(out.stats.max_in_flight, 1u);
  }
}

TEST(RunParallel, CrashingWorkerIsRequeued) {
  BoxDomain d({0.0, 0.0}, {1.0, 1.0});
  std::atomic<int> calls{0};
  auto f = [&](std::span<const double> x) {
    if (calls.fetch_add(1) == 5) throw WorkerCrash("lost worker");
    return bowl(x);
  };
  const auto out = run_parallel(f, d, {}, evals(20), {}, 3, 4);
  EXPECT_EQ(out.stats.crashes, 1u);
  EXPECT_EQ(out.result.evaluations.size(), 20u);
  for (const auto& r : out.result.evaluations) EXPECT_FALSE(r.failed);
}

TEST(RunParallel, FailuresDuringDesignAreValuedAfterIt) {
  BoxDomain d({0.0, 0.0}, {1.0, 1.0});
  std::atomic<int> calls{0};
  auto f = [&](std::span<const double> x) -> double {
    if (calls.fetch_add(1) == 0) throw std::runtime_error("bad");
    return bowl(x);
  };
  const auto out = run_parallel(f, d, {}, evals(10), {}, 4, 5);
  EXPECT_TRUE(audit_events(out.events).clean());
  std::size_t failed = 0;
  for (const auto& r : out.result.evaluations) failed += r.failed ? 1 : 0;
  EXPECT_EQ(failed, 1u);
}

TEST(RunParallel, TargetStopLeavesNoTemporaries) {
  BoxDomain d({-1.0, -1.0}, {1.0, 1.0});
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Budget b = evals(200);
    b.target_value = 0.01;
    const auto out = run_parallel(bowl, d, {}, b, {}, 4, seed);
    const auto rep = audit_events(out.events);
    EXPECT_EQ(rep.surviving_temps, 0u) << "seed " << seed;
    EXPECT_TRUE(rep.clean()) << "seed " << seed;
  }
}

TEST(RunParallel, TargetAndZeroWorkers) {
  BoxDomain d({-1.0, -1.0}, {1.0, 1.0});
  EXPECT_THROW(run_parallel(bowl, d, {}, evals(10), {}, 0, 1), ConfigError);
  Budget b = evals(300);
  b.target_value = 0.01;
  const auto out = run_parallel(bowl, d, {}, b, {}, 4, 6);
  EXPECT_EQ(out.result.stopped_because, StopReason::target_reached);
  EXPECT_TRUE(audit_events(out.events).clean());
}
