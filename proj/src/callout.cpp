// Copyright 2026 The credstack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "credstack/callout.hpp"

#include <errno.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstring>
#include <ctime>

#include "credstack/error.hpp"

extern char** environ;

namespace credstack {
namespace {

constexpr std::size_t kMaxOutput = 16 * 1024 * 1024;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept {
    reset(other.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw CalloutFailed(-1, std::string("pipe: ") + std::strerror(errno));
  }
  return Pipe{Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

// Blocks SIGPIPE on this thread while writing to a child that may have
// exited; a SIGPIPE raised meanwhile is consumed before restoring the mask.
class SigpipeGuard {
 public:
  SigpipeGuard() {
    sigemptyset(&pipe_set_);
    sigaddset(&pipe_set_, SIGPIPE);
    sigset_t pending;
    sigpending(&pending);
    already_pending_ = sigismember(&pending, SIGPIPE) == 1;
    pthread_sigmask(SIG_BLOCK, &pipe_set_, &old_mask_);
  }
  ~SigpipeGuard() {
    if (!already_pending_) {
      const timespec zero{0, 0};
      while (sigtimedwait(&pipe_set_, nullptr, &zero) == SIGPIPE) {
      }
    }
    pthread_sigmask(SIG_SETMASK, &old_mask_, nullptr);
  }
  SigpipeGuard(const SigpipeGuard&) = delete;
  SigpipeGuard& operator=(const SigpipeGuard&) = delete;

 private:
  sigset_t pipe_set_;
  sigset_t old_mask_;
  bool already_pending_ = false;
};

struct ChildResult {
  int status = 0;
  std::string out;
  std::string err;
};

ChildResult run_child(const std::filesystem::path& executable,
                      const std::string& input,
                      std::chrono::milliseconds timeout) {
  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.write.get(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err.write.get(), STDERR_FILENO);

  const std::string path = executable.string();
  std::array<char*, 2> argv{const_cast<char*>(path.c_str()), nullptr};
  pid_t pid = -1;
  const int rc =
      ::posix_spawn(&pid, path.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    if (rc == ENOENT || rc == EACCES || rc == ENOEXEC) {
      throw CalloutNotFound("cannot execute callout " + path + ": " +
                            std::strerror(rc));
    }
    throw CalloutFailed(-1, "cannot start callout " + path + ": " +
                                std::strerror(rc));
  }
  in.read.reset();
  out.write.reset();
  err.write.reset();
  set_nonblocking(in.write.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());

  SigpipeGuard sigpipe_guard;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  ChildResult result;
  std::size_t written = 0;
  if (input.empty()) in.write.reset();

  auto kill_child = [&] {
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
  };

  while (out.read.valid() || err.read.valid()) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      kill_child();
      throw CalloutTimeout("callout " + path + " timed out after " +
                           std::to_string(timeout.count()) + " ms");
    }

    std::array<pollfd, 3> fds{};
    nfds_t count = 0;
    const int in_fd = in.write.valid() ? in.write.get() : -1;
    fds[count++] = {out.read.valid() ? out.read.get() : -1, POLLIN, 0};
    fds[count++] = {err.read.valid() ? err.read.get() : -1, POLLIN, 0};
    fds[count++] = {in_fd, POLLOUT, 0};

    const int ready = ::poll(fds.data(), count, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      kill_child();
      throw CalloutFailed(-1, std::string("poll: ") + std::strerror(errno));
    }

    if (in.write.valid() && (fds[2].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(in.write.get(), input.data() + written,
                                input.size() - written);
      if (n > 0) {
        written += static_cast<std::size_t>(n);
        if (written == input.size()) in.write.reset();
      } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
        // The child closed its stdin (EPIPE); keep collecting its output.
        in.write.reset();
      }
    }

    auto drain = [&](Fd& fd, std::string& sink, short revents) {
      if (!fd.valid() || !(revents & (POLLIN | POLLERR | POLLHUP))) return;
      char buffer[4096];
      for (;;) {
        const ssize_t n = ::read(fd.get(), buffer, sizeof buffer);
        if (n > 0) {
          sink.append(buffer, static_cast<std::size_t>(n));
          if (sink.size() > kMaxOutput) {
            kill_child();
            throw CalloutProtocolError("callout " + path +
                                       " produced more than 16 MiB of output");
          }
          continue;
        }
        if (n == 0) fd.reset();
        if (n < 0 && errno == EINTR) continue;
        break;
      }
    };
    drain(out.read, result.out, fds[0].revents);
    drain(err.read, result.err, fds[1].revents);
  }
  in.write.reset();

  for (;;) {
    const pid_t done = ::waitpid(pid, &result.status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) {
      throw CalloutFailed(-1, std::string("waitpid: ") + std::strerror(errno));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      kill_child();
      throw CalloutTimeout("callout " + path + " timed out after " +
                           std::to_string(timeout.count()) + " ms");
    }
    ::usleep(1000);
  }
  return result;
}

}  // namespace

std::filesystem::path resolve_callout(const std::filesystem::path& executable,
                                      const std::filesystem::path& plugin_dir) {
  const std::filesystem::path path =
      executable.is_absolute() ? executable : plugin_dir / executable;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw CalloutNotFound("callout not found: " + path.string());
  }
  if (::access(path.c_str(), X_OK) != 0) {
    throw CalloutNotFound("callout is not executable: " + path.string());
  }
  return path;
}

nlohmann::json callout_request(const CalloutInvocation& invocation) {
  nlohmann::json kwargs =
      invocation.kwargs.is_object() ? invocation.kwargs : nlohmann::json::object();
  for (const auto& [key, value] : invocation.args.extra().items()) {
    kwargs[key] = value;
  }
  return nlohmann::json{{"context", invocation.context},
                        {"kwargs", std::move(kwargs)},
                        {"args", invocation.args.named_json()}};
}

GeneratedValue run_callout(const CalloutInvocation& invocation) {
  const GeneratorContext context(invocation.context);
  const auto executable =
      resolve_callout(invocation.executable, invocation.plugin_dir);
  const std::string input = callout_request(invocation).dump();

  ChildResult child = run_child(executable, input, invocation.timeout);

  if (WIFSIGNALED(child.status)) {
    throw CalloutFailed(128 + WTERMSIG(child.status), std::move(child.err));
  }
  const int code = WIFEXITED(child.status) ? WEXITSTATUS(child.status) : -1;
  if (code != 0) throw CalloutFailed(code, std::move(child.err));

  const auto reply = nlohmann::json::parse(child.out, nullptr, false);
  const std::string where = "callout " + executable.string() + ": ";
  if (reply.is_discarded() || !reply.is_object()) {
    throw CalloutProtocolError(where + "reply is not a JSON object");
  }
  const auto type = reply.find("type");
  const auto value = reply.find("value");
  if (type == reply.end() || !type->is_string()) {
    throw CalloutProtocolError(where + "reply lacks a text \"type\"");
  }
  if (value == reply.end() || !value->is_string()) {
    throw CalloutProtocolError(where + "reply lacks a text \"value\"");
  }
  if (type->get<std::string>() != context.type()) {
    throw CalloutProtocolError(where + "reply type '" + type->get<std::string>() +
                               "' does not match context type '" +
                               context.type() + "'");
  }

  GeneratedValue generated{context.type(), value->get<std::string>(), std::nullopt};
  if (const auto expiry = reply.find("expiry");
      expiry != reply.end() && !expiry->is_null()) {
    if (!expiry->is_number_integer()) {
      throw CalloutProtocolError(where + "\"expiry\" must be an integer");
    }
    generated.expiry = expiry->get<EpochSeconds>();
  }
  return generated;
}

}  // namespace credstack
