// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/bridge.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json_util.hpp"
#include "subdiff/case_io.hpp"
#include "subdiff/errors.hpp"

namespace subdiff {

// A child process whose stdin and stdout are one end of a socket pair, so
// writes to a dead child fail with EPIPE instead of raising SIGPIPE.
class BridgeBackend::Process {
 public:
  explicit Process(const std::string& command) {
    int fds[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw BackendUnavailable(std::string("socketpair: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
      close(fds[0]);
      close(fds[1]);
      throw BackendUnavailable(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      dup2(fds[1], STDIN_FILENO);
      dup2(fds[1], STDOUT_FILENO);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    fd_ = fds[0];
  }

  ~Process() {
    if (fd_ >= 0) {
      shutdown(fd_, SHUT_WR);
      close(fd_);
    }
    // Give the child a moment to exit on end-of-input, then kill it.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }

  void send_line(const std::string& line) {
    std::string buf = line + "\n";
    size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::send(fd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw BackendUnavailable(std::string("bridge write failed: ") + std::strerror(errno));
      off += static_cast<size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = pending_.find('\n'); nl != std::string::npos) {
        std::string line = pending_.substr(0, nl);
        pending_.erase(0, nl + 1);
        return line;
      }
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw BackendUnavailable("bridge timed out");
      pollfd pfd{fd_, POLLIN, 0};
      const int r = poll(&pfd, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw BackendUnavailable(std::string("poll: ") + std::strerror(errno));
      if (r == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw BackendUnavailable("bridge process closed its output");
      pending_.append(chunk, static_cast<size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string pending_;
};

BridgeBackend::BridgeBackend(std::string command, std::string device, std::chrono::milliseconds timeout)
    : command_(std::move(command)), device_(std::move(device)), timeout_(timeout) {}

BridgeBackend::~BridgeBackend() = default;

std::string BridgeBackend::name() const { return "bridge:" + command_ + ":" + device_; }

std::string BridgeBackend::request(const std::string& line) {
  try {
    proc_->send_line(line);
    return proc_->read_line(timeout_);
  } catch (const BackendUnavailable&) {
    proc_.reset();
    throw;
  }
}

namespace {

detail::json parse_response(const std::string& line, const char* expected) {
  detail::json j;
  try {
    j = detail::parse_json(line, "bridge response");
  } catch (const ParseError& e) {
    throw BackendUnavailable(std::string("malformed bridge response: ") + e.what());
  }
  const auto type = j.is_object() ? j.find("type") : j.end();
  if (type == j.end() || !type->is_string()) throw BackendUnavailable("bridge response without a type");
  if (*type == "error") {
    const auto msg = j.find("message");
    throw BackendUnavailable("bridge error: " + (msg != j.end() && msg->is_string() ? msg->get<std::string>() : "?"));
  }
  if (*type != expected) {
    throw BackendUnavailable("unexpected bridge response '" + type->get<std::string>() + "', wanted '" + expected +
                             "'");
  }
  return j;
}

}  // namespace

void BridgeBackend::ensure_started() {
  if (proc_) return;
  proc_ = std::make_unique<Process>(command_);
  detail::ojson hello{{"type", "hello"}, {"version", kBridgeProtocolVersion}};
  const detail::json j = parse_response(request(hello.dump()), "hello");
  try {
    if (detail::as_int(detail::field(j, "version", "hello"), "hello.version") != kBridgeProtocolVersion) {
      throw BackendUnavailable("bridge speaks protocol version " + j["version"].dump());
    }
    bool has_device = false;
    for (const auto& d : detail::field(j, "devices", "hello")) has_device = has_device || d == device_;
    if (!has_device) throw BackendUnavailable("bridge device '" + device_ + "' is unavailable");
    ops_.clear();
    for (const auto& op : detail::field(j, "ops", "hello")) ops_.insert(detail::as_string(op, "hello.ops"));
  } catch (const ParseError& e) {
    proc_.reset();
    throw BackendUnavailable(std::string("bad hello: ") + e.what());
  } catch (const BackendUnavailable&) {
    proc_.reset();
    throw;
  }
}

const std::set<std::string>& BridgeBackend::ops() {
  ensure_started();
  return ops_;
}

CaseOutputs BridgeBackend::run_case(const TestCase& c) {
  ensure_started();
  for (const auto& n : c.pattern.nodes()) {
    if (ops_.count(n.api) == 0) throw BackendUnavailable("bridge does not support " + n.api);
  }
  detail::ojson req;
  req["type"] = "run_case";
  req["device"] = device_;
  req["case"] = detail::ojson::parse(dump_case(c, true));
  const detail::json j = parse_response(request(req.dump()), "case_result");
  CaseOutputs out;
  try {
    out = detail::outputs_from_json(j, "case_result");
  } catch (const ParseError& e) {
    throw BackendUnavailable(std::string("bad case_result: ") + e.what());
  }
  for (const auto& n : c.pattern.nodes()) {
    if (out.count(n.id) == 0) throw BackendUnavailable("case_result lacks node " + std::to_string(n.id));
  }
  if (out.size() != c.pattern.size()) throw BackendUnavailable("case_result has unknown nodes");
  return out;
}

}  // namespace subdiff
