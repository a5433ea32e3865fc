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

#pragma once

/// \file child_process.hpp
/// Child process speaking a line-delimited protocol over stdin/stdout. Used by
/// the embedding bridge client and the external re-ranking scorer.

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace humir {

class ChildProcess {
 public:
  using Env = std::vector<std::pair<std::string, std::string>>;

  /// Runs `command_line` through /bin/sh -c with `extra_env` added to the
  /// inherited environment. stderr is inherited.
  explicit ChildProcess(const std::string& command_line, const Env& extra_env = {});
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess();

  /// Appends '\n'. Throws ExternalError if the child has gone away.
  void write_line(std::string_view line);
  /// Next line without its terminator; nullopt at end of stream. Throws
  /// ExternalError when nothing arrives within `timeout`.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  /// Sends all `requests` from a writer thread while reading exactly
  /// `n_responses` lines, so neither pipe can fill up and deadlock. With
  /// `close_input` the child sees end of input once the last request is out.
  std::vector<std::string> transact(const std::vector<std::string>& requests,
                                    std::size_t n_responses,
                                    std::chrono::milliseconds timeout,
                                    bool close_input = false);

  void close_stdin();
  /// Waits for exit; returns the exit status (128 + signal when killed).
  int wait();
  /// SIGKILL and reap. Pipes stay open until destruction.
  void kill();

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  pid_t pid_ = -1;
  int in_fd_ = -1;   // child's stdin (we write)
  int out_fd_ = -1;  // child's stdout (we read)
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> status_;
};

}  // namespace humir
