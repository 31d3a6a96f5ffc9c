#include "rbfsearch/io/runlog.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace rbfsearch::io {

json params_json(std::span<const double> x, const hpo::HpoSpace* space) {
  json j = json::object();
  if (!space) {
    for (std::size_t i = 0; i < x.size(); ++i) j[fmt::format("x{}", i)] = x[i];
    return j;
  }
  for (const auto& [name, v] : hpo::decode(*space, x))
    std::visit([&, &name = name](const auto& val) { j[name] = val; }, v);
  return j;
}

json record_json(const EvalRecord& r, ObjectiveSense sense, const hpo::HpoSpace* space,
                 bool with_time) {
  json j;
  j["seq"] = r.sequence_id;
  j["kind"] = std::string(to_string(r.kind));
  j["point"] = r.point;
  j["params"] = params_json(r.point, space);
  j["value"] = sense.to_user(r.value);
  if (with_time) j["t_wall_ms"] = r.t_wall_ms;
  j["weight"] = r.weight_used ? json(*r.weight_used) : json(nullptr);
  j["worker"] = r.worker;
  j["failed"] = r.failed;
  return j;
}

json event_json(const SchedulerEvent& e) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["seq"] = e.seq;
  j["kind"] = std::string(to_string(e.kind));
  j["task"] = e.task;
  j["task_kind"] = std::string(to_string(e.task_kind));
  j["point"] = e.point;
  j["value"] = opt(e.value);
  j["range"] = e.range_lo ? json::array({*e.range_lo, *e.range_hi}) : json(nullptr);
  j["weight"] = opt(e.weight);
  j["t_wall_ms"] = e.t_wall_ms;
  j["worker"] = e.worker;
  j["failed"] = e.failed;
  return j;
}

void ResultLog::append(const EvalRecord& r, ObjectiveSense sense) {
  *out_ << record_json(r, sense, space_, with_time_).dump() << '\n';
  out_->flush();
}

RunHooks ResultLog::hooks() {
  return RunHooks{[this](const EvalRecord& r, ObjectiveSense s) { append(r, s); }};
}

std::vector<LogEntry> read_result_log(std::istream& in) {
  std::vector<LogEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      LogEntry e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.kind = j.at("kind").get<std::string>();
      e.point = j.at("point").get<Point>();
      e.value = j.at("value").get<double>();
      if (j.contains("t_wall_ms")) e.t_wall_ms = j["t_wall_ms"].get<double>();
      if (j.contains("weight") && !j["weight"].is_null()) e.weight = j["weight"].get<double>();
      e.worker = j.at("worker").get<int>();
      e.failed = j.value("failed", false);
      if (e.seq != out.size())
        throw Error(fmt::format("expected seq {}, found {}", out.size(), e.seq));
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(fmt::format("result log line {}: {}", lineno, ex.what()));
    } catch (const Error& ex) {
      throw Error(fmt::format("result log line {}: {}", lineno, ex.what()));
    }
  }
  return out;
}

std::vector<double> replay_trace(const std::vector<LogEntry>& entries, ObjectiveSense sense) {
  std::vector<double> values;
  values.reserve(entries.size());
  for (const auto& e : entries) values.push_back(e.value);
  return best_so_far_trace(values, sense);
}

void write_result_log(std::ostream& out, const OptimizationResult& r,
                      const hpo::HpoSpace* space, bool with_time) {
  ResultLog log(out, space, with_time);
  for (const auto& rec : r.evaluations) log.append(rec, r.sense);
}

}  // namespace rbfsearch::io
