#pragma once

// Line-delimited JSON logs. Result log lines carry
// {seq, kind, point, params, value, t_wall_ms, weight, worker, failed} with
// the value in the user's sense; event log lines mirror SchedulerEvent.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbfsearch/engine.hpp"
#include "rbfsearch/hpo.hpp"
#include "rbfsearch/scheduler.hpp"

namespace rbfsearch::io {

using json = nlohmann::ordered_json;

/// Decoded parameters of a raw point: the HPO configuration when a space is
/// given, otherwise {"x0": ..., "x1": ...}.
json params_json(std::span<const double> x, const hpo::HpoSpace* space);

json record_json(const EvalRecord& r, ObjectiveSense sense, const hpo::HpoSpace* space,
                 bool with_time = true);
json event_json(const SchedulerEvent& e);

/// Appends one line per record. Not thread-safe; the drivers call hooks from
/// the owning thread only.
class ResultLog {
 public:
  ResultLog(std::ostream& out, const hpo::HpoSpace* space = nullptr, bool with_time = true)
      : out_(&out), space_(space), with_time_(with_time) {}

  void append(const EvalRecord& r, ObjectiveSense sense);
  RunHooks hooks();

 private:
  std::ostream* out_;
  const hpo::HpoSpace* space_;
  bool with_time_;
};

struct LogEntry {
  std::uint64_t seq = 0;
  std::string kind;
  Point point;
  double value = 0.0;  // user sense
  std::optional<double> t_wall_ms;
  std::optional<double> weight;
  int worker = 0;
  bool failed = false;
};

/// Parses a result log. Throws Error on malformed lines or out-of-order seq.
std::vector<LogEntry> read_result_log(std::istream& in);

/// Best-so-far trace recomputed from log entries.
std::vector<double> replay_trace(const std::vector<LogEntry>& entries, ObjectiveSense sense);

/// Writes every record of a finished run.
void write_result_log(std::ostream& out, const OptimizationResult& r,
                      const hpo::HpoSpace* space = nullptr, bool with_time = true);

}  // namespace rbfsearch::io
