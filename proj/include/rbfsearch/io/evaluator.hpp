#pragma once

// External evaluators speak line-delimited JSON over the child's standard
// input and output. Request: {"id": <int>, "params": {...}}. Response:
// {"id": <int>, "objective": <number>} with an optional "error" string.
// One process is spawned per evaluation through /bin/sh -c.

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rbfsearch/io/runlog.hpp"

namespace rbfsearch::io {

/// Malformed response, id mismatch, missing objective, reported error.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// The evaluator exceeded its time limit or exited with a nonzero status.
class EvaluatorError : public Error {
 public:
  using Error::Error;
};

struct Request {
  std::uint64_t id = 0;
  json params;
};

struct Response {
  std::uint64_t id = 0;
  std::optional<double> objective;
  std::optional<std::string> error;
};

std::string encode_request(const Request& r);
Request decode_request(std::string_view line);
std::string encode_response(const Response& r);
Response decode_response(std::string_view line);

/// Objective value of a response to `expected_id`; throws ProtocolError.
double response_objective(const Response& r, std::uint64_t expected_id);

class ExternalEvaluator {
 public:
  ExternalEvaluator(std::string command, double timeout_seconds);

  /// Runs the command once. Throws ProtocolError / EvaluatorError for failed
  /// evaluations and WorkerCrash when the child is killed by a signal.
  double evaluate(const json& params);

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  double timeout_seconds_;
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace rbfsearch::io
