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

#include "humir/corpus.hpp"

#include <fmt/core.h>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "humir/errors.hpp"
#include "humir/utf8.hpp"

namespace humir {

namespace {

bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string_view::npos;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

// Reads lines, validating UTF-8 and stripping a trailing CR. Blank lines are
// passed through so callers can count them for line numbers.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto bad = utf8::find_invalid(line)) {
      throw DataError(fmt::format("{}:{}: invalid UTF-8 at byte {}",
                                  path.string(), lineno, *bad));
    }
    fn(std::string_view(line), lineno);
  }
}

std::pair<std::string, std::string> split_id_text(
    std::string_view line, const std::filesystem::path& path,
    std::size_t lineno, std::string_view what) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw DataError(fmt::format("{}:{}: malformed {} line (no tab separator)",
                                path.string(), lineno, what));
  }
  auto id = line.substr(0, tab);
  auto text = line.substr(tab + 1);
  if (id.empty() || has_whitespace(id)) {
    throw DataError(fmt::format("{}:{}: malformed {} id '{}'", path.string(),
                                lineno, what, id));
  }
  if (text.empty()) {
    throw DataError(fmt::format("{}:{}: empty text for {} '{}'",
                                path.string(), lineno, what, id));
  }
  return {std::string(id), std::string(text)};
}

Document parse_jsonl_record(std::string_view line,
                            const std::filesystem::path& path,
                            std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(
        fmt::format("{}:{}: malformed JSON: {}", path.string(), lineno, e.what()));
  }
  auto fail = [&](std::string_view why) {
    return DataError(fmt::format("{}:{}: {}", path.string(), lineno, why));
  };
  if (!j.is_object()) throw fail("record is not an object");
  if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
  if (!j.contains("text") || !j["text"].is_string()) {
    throw fail("missing string field 'text'");
  }
  Document d;
  d.doc_id = j["id"].get<std::string>();
  d.text = j["text"].get<std::string>();
  if (d.doc_id.empty() || has_whitespace(d.doc_id)) {
    throw fail(fmt::format("malformed document id '{}'", d.doc_id));
  }
  if (d.text.empty()) throw fail(fmt::format("empty text for document '{}'", d.doc_id));
  if (j.contains("meta") && !j["meta"].is_null()) {
    if (!j["meta"].is_object()) throw fail("'meta' is not an object");
    for (const auto& [k, v] : j["meta"].items()) {
      if (!v.is_string()) throw fail(fmt::format("meta field '{}' is not a string", k));
      d.meta.emplace(k, v.get<std::string>());
    }
  }
  return d;
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "tsv") return CorpusFormat::tsv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  throw UsageError(fmt::format("unknown corpus format '{}'", name));
}

bool QrelSet::add(const std::string& topic_id, const std::string& doc_id,
                  long rel) {
  const int label = rel > 0 ? 1 : 0;
  auto& docs = by_topic_[topic_id];
  auto [it, inserted] = docs.emplace(doc_id, label);
  if (inserted) {
    ++size_;
    return true;
  }
  return it->second == label;
}

int QrelSet::relevance(std::string_view topic_id,
                       std::string_view doc_id) const {
  auto t = by_topic_.find(topic_id);
  if (t == by_topic_.end()) return 0;
  auto d = t->second.find(doc_id);
  return d == t->second.end() ? 0 : d->second;
}

std::size_t QrelSet::num_relevant(std::string_view topic_id) const {
  auto t = by_topic_.find(topic_id);
  if (t == by_topic_.end()) return 0;
  std::size_t n = 0;
  for (const auto& [doc, rel] : t->second) n += rel;
  return n;
}

bool QrelSet::has_topic(std::string_view topic_id) const {
  return by_topic_.find(topic_id) != by_topic_.end();
}

std::vector<std::string> QrelSet::topic_ids() const {
  std::vector<std::string> out;
  out.reserve(by_topic_.size());
  for (const auto& [t, _] : by_topic_) out.push_back(t);
  return out;
}

const std::map<std::string, int, std::less<>>& QrelSet::judgements(
    std::string_view topic_id) const {
  static const std::map<std::string, int, std::less<>> kEmpty;
  auto t = by_topic_.find(topic_id);
  return t == by_topic_.end() ? kEmpty : t->second;
}

std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  CorpusFormat format) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    if (line.empty()) return;
    Document d;
    if (format == CorpusFormat::tsv) {
      auto [id, text] = split_id_text(line, path, lineno, "document");
      d.doc_id = std::move(id);
      d.text = std::move(text);
    } else {
      d = parse_jsonl_record(line, path, lineno);
    }
    if (!seen.insert(d.doc_id).second) {
      throw DataError(fmt::format("{}:{}: duplicate doc_id '{}'", path.string(),
                                  lineno, d.doc_id));
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

std::vector<Topic> load_topics(const std::filesystem::path& path) {
  std::vector<Topic> topics;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    if (line.empty()) return;
    auto [id, text] = split_id_text(line, path, lineno, "topic");
    if (!seen.insert(id).second) {
      throw DataError(fmt::format("{}:{}: duplicate topic_id '{}'",
                                  path.string(), lineno, id));
    }
    topics.push_back(Topic{std::move(id), std::move(text)});
  });
  return topics;
}

QrelSet load_qrels(const std::filesystem::path& path) {
  QrelSet qrels;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    std::istringstream fields{std::string(line)};
    std::vector<std::string> cols;
    for (std::string f; fields >> f;) cols.push_back(std::move(f));
    if (cols.empty()) return;
    if (cols.size() != 4) {
      throw DataError(fmt::format("{}:{}: expected 4 columns, got {}",
                                  path.string(), lineno, cols.size()));
    }
    const std::string& rel_text = cols[3];
    char* end = nullptr;
    errno = 0;
    const long rel = std::strtol(rel_text.c_str(), &end, 10);
    if (errno != 0 || end == rel_text.c_str() || *end != '\0') {
      throw DataError(fmt::format("{}:{}: non-integer relevance '{}'",
                                  path.string(), lineno, rel_text));
    }
    if (!qrels.add(cols[0], cols[2], rel)) {
      throw DataError(fmt::format(
          "{}:{}: conflicting relevance for topic '{}' doc '{}'",
          path.string(), lineno, cols[0], cols[2]));
    }
  });
  return qrels;
}

void write_corpus_tsv(const std::vector<Document>& docs,
                      const std::filesystem::path& path) {
  for (const auto& d : docs) {
    if (d.text.find_first_of("\r\n") != std::string::npos) {
      throw DataError(fmt::format(
          "document '{}' contains a line break and cannot be written as TSV",
          d.doc_id));
    }
  }
  auto out = open_output(path);
  for (const auto& d : docs) out << d.doc_id << '\t' << d.text << '\n';
}

void write_topics_tsv(const std::vector<Topic>& topics,
                      const std::filesystem::path& path) {
  for (const auto& t : topics) {
    if (t.text.find_first_of("\r\n") != std::string::npos) {
      throw DataError(fmt::format(
          "topic '{}' contains a line break and cannot be written as TSV",
          t.topic_id));
    }
  }
  auto out = open_output(path);
  for (const auto& t : topics) out << t.topic_id << '\t' << t.text << '\n';
}

void write_qrels(const QrelSet& qrels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& topic : qrels.topic_ids()) {
    for (const auto& [doc, rel] : qrels.judgements(topic)) {
      out << topic << " 0 " << doc << ' ' << rel << '\n';
    }
  }
}

std::unordered_map<std::string, std::string> text_lookup(
    const std::vector<Document>& docs) {
  std::unordered_map<std::string, std::string> m;
  m.reserve(docs.size());
  for (const auto& d : docs) m.emplace(d.doc_id, d.text);
  return m;
}

}  // namespace humir
