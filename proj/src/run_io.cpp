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

#include "humir/run_io.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "humir/errors.hpp"

namespace humir {

namespace {

bool is_token(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n\v\f") == std::string_view::npos;
}

struct RawEntry {
  std::string doc_id;
  long rank;
  double score;
  std::size_t lineno;
};

}  // namespace

std::string format_run(const std::vector<RankedList>& lists, std::string_view run_tag) {
  if (!is_token(run_tag)) {
    throw DataError(fmt::format("run tag '{}' must be non-empty without whitespace", run_tag));
  }
  std::unordered_set<std::string_view> topics;
  for (const auto& list : lists) {
    if (!is_token(list.topic_id)) {
      throw DataError(fmt::format("invalid topic id '{}'", list.topic_id));
    }
    if (!topics.insert(list.topic_id).second) {
      throw DataError(fmt::format("topic '{}' appears twice in run", list.topic_id));
    }
    for (const auto& e : list.entries) {
      if (!is_token(e.doc_id)) {
        throw DataError(fmt::format("topic '{}': invalid doc id '{}'", list.topic_id, e.doc_id));
      }
    }
    validate(list);
  }
  std::string out;
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      const auto& e = list.entries[i];
      out += fmt::format("{} Q0 {} {} {:.6f} {}\n", list.topic_id, e.doc_id, i + 1, e.score,
                         run_tag);
    }
  }
  return out;
}

std::size_t emit_run(const std::vector<RankedList>& lists, std::string_view run_tag,
                     const std::filesystem::path& path) {
  const auto text = format_run(lists, run_tag);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("short write to {}", path.string()));
  std::size_t lines = 0;
  for (const auto& list : lists) lines += list.entries.size();
  return lines;
}

RunFile parse_run_text(std::string_view text, ParseOptions opts, std::string_view source) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RawEntry>> by_topic;
  std::map<std::string, std::unordered_set<std::string>> seen_docs;
  RunFile run;

  auto fail = [&](std::size_t lineno, std::string_view why) {
    return DataError(fmt::format("{}:{}: {}", source, lineno, why));
  };

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;

    std::istringstream fields{std::string(line)};
    std::vector<std::string> cols;
    for (std::string f; fields >> f;) cols.push_back(std::move(f));
    if (cols.empty()) continue;
    if (cols.size() != 6) throw fail(lineno, fmt::format("expected 6 columns, got {}", cols.size()));
    if (!opts.lenient && cols[1] != "Q0") {
      throw fail(lineno, fmt::format("second column must be Q0, got '{}'", cols[1]));
    }

    char* end = nullptr;
    errno = 0;
    const long rank = std::strtol(cols[3].c_str(), &end, 10);
    if (errno != 0 || *end != '\0' || end == cols[3].c_str() || rank < 1) {
      throw fail(lineno, fmt::format("rank '{}' is not a positive integer", cols[3]));
    }
    errno = 0;
    const double score = std::strtod(cols[4].c_str(), &end);
    if (errno == ERANGE || *end != '\0' || end == cols[4].c_str() || !std::isfinite(score)) {
      throw fail(lineno, fmt::format("score '{}' is not a finite number", cols[4]));
    }

    auto [it, inserted] = by_topic.try_emplace(cols[0]);
    if (inserted) order.push_back(cols[0]);
    auto& entries = it->second;
    if (!opts.lenient) {
      if (static_cast<std::size_t>(rank) != entries.size() + 1) {
        throw fail(lineno, fmt::format("topic '{}': expected rank {}, got {}", cols[0],
                                       entries.size() + 1, rank));
      }
      if (!entries.empty() && score > entries.back().score) {
        throw fail(lineno, fmt::format("topic '{}': score increases at rank {}", cols[0], rank));
      }
      if (!seen_docs[cols[0]].insert(cols[2]).second) {
        throw fail(lineno, fmt::format("topic '{}': duplicate doc '{}'", cols[0], cols[2]));
      }
    }
    entries.push_back({cols[2], rank, score, lineno});
    if (std::find(run.tags.begin(), run.tags.end(), cols[5]) == run.tags.end()) {
      run.tags.push_back(cols[5]);
    }
  }

  for (const auto& topic : order) {
    auto& entries = by_topic.at(topic);
    if (opts.lenient) {
      std::stable_sort(entries.begin(), entries.end(), [](const RawEntry& a, const RawEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.doc_id < b.doc_id;
      });
      std::unordered_set<std::string> seen;
      std::erase_if(entries, [&](const RawEntry& e) { return !seen.insert(e.doc_id).second; });
    }
    RankedList list{topic, {}};
    list.entries.reserve(entries.size());
    for (auto& e : entries) list.entries.push_back({std::move(e.doc_id), e.score});
    run.lists.push_back(std::move(list));
  }
  return run;
}

RunFile parse_run_file(const std::filesystem::path& path, ParseOptions opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open run {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_text(buf.str(), opts, path.string());
}

std::vector<RankedList> parse_run(const std::filesystem::path& path, ParseOptions opts) {
  return parse_run_file(path, opts).lists;
}

}  // namespace humir
