// Copyright 2026 The humir Authors
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

#include "humir/child_process.hpp"

#include <fcntl.h>
#include <fmt/core.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "humir/errors.hpp"

extern char** environ;

namespace humir {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::vector<std::string> build_env(const ChildProcess::Env& extra) {
  std::vector<std::string> env;
  for (char** e = environ; *e != nullptr; ++e) {
    std::string_view entry(*e);
    const auto key = entry.substr(0, entry.find('='));
    bool overridden = false;
    for (const auto& [k, v] : extra) overridden |= (k == key);
    if (!overridden) env.emplace_back(entry);
  }
  for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
  return env;
}

}  // namespace

ChildProcess::ChildProcess(const std::string& command_line, const Env& extra_env)
    : command_(command_line) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) {
    throw ExternalError(fmt::format("pipe: {}", std::strerror(errno)));
  }
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ExternalError(fmt::format("pipe: {}", std::strerror(errno)));
  }

  posix_spawn_file_actions_t actions;
  ::posix_spawn_file_actions_init(&actions);
  ::posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  ::posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  auto env = build_env(extra_env);
  std::vector<char*> envp;
  for (auto& e : env) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command_line;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

  // Own process group, so kill() also reaches whatever the shell started.
  posix_spawnattr_t attr;
  ::posix_spawnattr_init(&attr);
  ::posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  ::posix_spawnattr_setpgroup(&attr, 0);
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, envp.data());
  ::posix_spawn_file_actions_destroy(&actions);
  ::posix_spawnattr_destroy(&attr);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw ExternalError(fmt::format("cannot start '{}': {}", command_line, std::strerror(rc)));
  }
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
}

ChildProcess::~ChildProcess() {
  if (pid_ > 0 && !status_) {
    close_stdin();
    // Give a well-behaved child the chance to exit on EOF before killing it.
    for (int i = 0; i < 50 && !status_; ++i) {
      int st = 0;
      if (::waitpid(pid_, &st, WNOHANG) == pid_) {
        status_ = st;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!status_) kill();
  }
  close_stdin();
  if (out_fd_ >= 0) ::close(out_fd_);
}

void ChildProcess::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExternalError(fmt::format("'{}' stopped reading input: {}", command_,
                                      std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ChildProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_) {
      if (buffer_.empty()) return std::nullopt;
      return std::exchange(buffer_, {});
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw ExternalError(fmt::format("timed out waiting for output from '{}'", command_));
    }
    pollfd pfd{out_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno != EINTR) {
      throw ExternalError(fmt::format("poll: {}", std::strerror(errno)));
    }
    if (rc <= 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(out_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExternalError(fmt::format("read from '{}': {}", command_, std::strerror(errno)));
    }
    if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

std::vector<std::string> ChildProcess::transact(const std::vector<std::string>& requests,
                                                std::size_t n_responses,
                                                std::chrono::milliseconds timeout,
                                                bool close_input) {
  std::exception_ptr write_error;
  std::vector<std::string> responses;
  responses.reserve(n_responses);
  {
    std::jthread writer([&] {
      try {
        for (const auto& r : requests) write_line(r);
        if (close_input) close_stdin();
      } catch (...) {
        write_error = std::current_exception();
      }
    });
    try {
      while (responses.size() < n_responses) {
        auto line = read_line(timeout);
        if (!line) {
          throw ExternalError(fmt::format("'{}' closed its output after {} of {} responses",
                                          command_, responses.size(), n_responses));
        }
        if (line->empty()) continue;
        responses.push_back(std::move(*line));
      }
    } catch (...) {
      // Unblocks the writer if it is stuck on a full pipe.
      kill();
      throw;
    }
  }
  if (write_error) std::rethrow_exception(write_error);
  return responses;
}

void ChildProcess::close_stdin() {
  if (in_fd_ >= 0) {
    ::close(in_fd_);
    in_fd_ = -1;
  }
}

int ChildProcess::wait() {
  close_stdin();
  if (!status_) {
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0) {
      if (errno != EINTR) throw ExternalError(fmt::format("waitpid: {}", std::strerror(errno)));
    }
    status_ = st;
  }
  if (WIFEXITED(*status_)) return WEXITSTATUS(*status_);
  if (WIFSIGNALED(*status_)) return 128 + WTERMSIG(*status_);
  return -1;
}

void ChildProcess::kill() {
  if (pid_ > 0 && !status_) {
    ::kill(-pid_, SIGKILL);
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
    }
    status_ = st;
  }
}

}  // namespace humir
