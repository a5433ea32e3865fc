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

/// \file run_io.hpp
/// TREC run files: `topic_id Q0 doc_id rank score run_tag`, one line per
/// retrieved document, scores printed with six decimals.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "humir/ranking.hpp"

namespace humir {

/// Renders lists in input order. Throws DataError (before producing any
/// output) on a bad run tag, duplicate topics or a list violating the
/// RankedList invariants.
std::string format_run(const std::vector<RankedList>& lists, std::string_view run_tag);

/// Writes format_run output to `path`; returns the number of lines.
std::size_t emit_run(const std::vector<RankedList>& lists, std::string_view run_tag,
                     const std::filesystem::path& path);

struct ParseOptions {
  /// Accept unsorted, gapped or duplicated entries and rebuild each topic's
  /// ranking from the scores instead of failing.
  bool lenient = false;
};

struct RunFile {
  std::vector<RankedList> lists;  // topics in first-appearance order
  std::vector<std::string> tags;  // distinct run tags, first-appearance order
};

RunFile parse_run_text(std::string_view text, ParseOptions opts = {},
                       std::string_view source = "<run>");
RunFile parse_run_file(const std::filesystem::path& path, ParseOptions opts = {});
std::vector<RankedList> parse_run(const std::filesystem::path& path, ParseOptions opts = {});

}  // namespace humir
