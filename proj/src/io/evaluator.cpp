#include "rbfsearch/io/evaluator.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "rbfsearch/scheduler.hpp"

extern char** environ;

namespace rbfsearch::io {

std::string encode_request(const Request& r) {
  json j;
  j["id"] = r.id;
  j["params"] = r.params;
  return j.dump();
}

Request decode_request(std::string_view line) {
  try {
    const auto j = json::parse(line);
    return Request{j.at("id").get<std::uint64_t>(), j.at("params")};
  } catch (const json::exception& e) {
    throw ProtocolError(fmt::format("malformed request: {}", e.what()));
  }
}

std::string encode_response(const Response& r) {
  json j;
  j["id"] = r.id;
  if (r.objective) j["objective"] = *r.objective;
  if (r.error) j["error"] = *r.error;
  return j.dump();
}

Response decode_response(std::string_view line) {
  try {
    const auto j = json::parse(line);
    Response r;
    r.id = j.at("id").get<std::uint64_t>();
    if (j.contains("objective") && !j["objective"].is_null())
      r.objective = j["objective"].get<double>();
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(fmt::format("malformed response: {}", e.what()));
  }
}

double response_objective(const Response& r, std::uint64_t expected_id) {
  if (r.id != expected_id)
    throw ProtocolError(fmt::format("response id {} does not match request id {}", r.id,
                                    expected_id));
  if (r.error) throw ProtocolError(fmt::format("evaluator reported: {}", *r.error));
  if (!r.objective) throw ProtocolError("response has no objective");
  if (!std::isfinite(*r.objective)) throw ProtocolError("objective is not finite");
  return *r.objective;
}

// ---------------------------------------------------------------------------

namespace {

struct Fd {
  int fd = -1;
  explicit Fd(int f = -1) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd& r, Fd& w) {
  int p[2];
  if (::pipe2(p, O_CLOEXEC) != 0)
    throw EvaluatorError(fmt::format("pipe: {}", std::strerror(errno)));
  r.fd = p[0];
  w.fd = p[1];
}

void write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;  // child closed its input; the response (or exit status) decides
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(std::string command, double timeout_seconds)
    : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw ConfigError("evaluator command is empty");
  if (!(timeout_seconds_ > 0.0)) throw ConfigError("evaluator timeout must be positive");
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });
}

double ExternalEvaluator::evaluate(const json& params) {
  const std::uint64_t id = next_id_.fetch_add(1);
  const std::string request = encode_request(Request{id, params}) + "\n";

  Fd in_r, in_w, out_r, out_w;
  make_pipe(in_r, in_w);
  make_pipe(out_r, out_w);

  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, in_r.fd, STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&fa, out_w.fd, STDOUT_FILENO);
  std::string sh = "sh", dash_c = "-c";
  char* argv[] = {sh.data(), dash_c.data(), command_.data(), nullptr};
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &fa, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw EvaluatorError(fmt::format("spawn failed: {}", std::strerror(rc)));
  in_r.reset();
  out_w.reset();

  write_all(in_w.fd, request);
  in_w.reset();

  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::duration_cast<clock::duration>(
                         std::chrono::duration<double>(timeout_seconds_));
  auto remaining_ms = [&] {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    return static_cast<int>(std::max<long long>(0, left));
  };

  std::string buf;
  bool timed_out = false;
  char chunk[4096];
  while (buf.find('\n') == std::string::npos) {
    pollfd p{out_r.fd, POLLIN, 0};
    const int pr = ::poll(&p, 1, remaining_ms());
    if (pr < 0 && errno == EINTR) continue;
    if (pr == 0) {
      timed_out = true;
      break;
    }
    const ssize_t n = ::read(out_r.fd, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;  // EOF
    buf.append(chunk, static_cast<std::size_t>(n));
  }
  out_r.reset();

  int status = 0;
  while (!timed_out) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (remaining_ms() == 0) {
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    throw EvaluatorError(fmt::format("evaluator timed out after {} s", timeout_seconds_));
  }
  if (WIFSIGNALED(status))
    throw WorkerCrash(fmt::format("evaluator killed by signal {}", WTERMSIG(status)));
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0)
    throw EvaluatorError(fmt::format("evaluator exited with status {}", WEXITSTATUS(status)));

  const auto nl = buf.find('\n');
  if (nl == std::string::npos && buf.empty()) throw ProtocolError("evaluator sent no response");
  return response_objective(decode_response(buf.substr(0, nl)), id);
}

}  // namespace rbfsearch::io
