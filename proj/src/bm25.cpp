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

#include "humir/bm25.hpp"

#include <fmt/core.h>
#include <locale.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cwctype>
#include <fstream>
#include <map>

#include "humir/errors.hpp"
#include "humir/utf8.hpp"

namespace humir {

namespace {

constexpr char kIndexMagic[8] = {'H', 'M', 'R', 'B', 'M', '2', '5', '\0'};
constexpr std::uint32_t kIndexVersion = 1;

// Character classes come from glibc's C.UTF-8 tables rather than the process
// locale so tokenisation does not depend on the environment.
locale_t unicode_locale() {
  static const locale_t loc = [] {
    locale_t l = ::newlocale(LC_ALL_MASK, "C.UTF-8", locale_t{});
    if (l == locale_t{}) throw std::runtime_error("C.UTF-8 locale unavailable");
    return l;
  }();
  return loc;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, std::string_view s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated index file");
  return v;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("truncated index file");
  return s;
}

}  // namespace

static_assert(std::endian::native == std::endian::little);

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw UsageError(fmt::format("BM25 k1 must be > 0, got {}", k1));
  if (!(b >= 0.0 && b <= 1.0)) {
    throw UsageError(fmt::format("BM25 b must be in [0, 1], got {}", b));
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  if (!utf8::is_valid(text)) throw DataError("tokenize: invalid UTF-8");
  const locale_t loc = unicode_locale();
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::decode(text, pos);
    const auto wc = static_cast<wint_t>(cp);
    if (::iswalnum_l(wc, loc)) {
      utf8::append(current, static_cast<char32_t>(::towlower_l(wc, loc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t InvertedIndex::doc_freq(std::string_view term) const {
  return postings(term).size();
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

void InvertedIndex::finalize() {
  double total = 0.0;
  for (auto len : doc_lengths_) total += len;
  avgdl_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

InvertedIndex build_index(const std::vector<Document>& docs) {
  InvertedIndex idx;
  idx.doc_ids_.reserve(docs.size());
  idx.doc_lengths_.reserve(docs.size());
  std::map<std::string, std::uint32_t> tf;
  for (std::size_t row = 0; row < docs.size(); ++row) {
    tf.clear();
    const auto tokens = tokenize(docs[row].text);
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) {
      idx.postings_[term].push_back({static_cast<std::uint32_t>(row), count});
    }
    idx.doc_ids_.push_back(docs[row].doc_id);
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
  }
  idx.finalize();
  return idx;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out.write(kIndexMagic, sizeof(kIndexMagic));
  put(out, kIndexVersion);
  put(out, static_cast<std::uint64_t>(doc_ids_.size()));
  for (std::size_t r = 0; r < doc_ids_.size(); ++r) {
    put_string(out, doc_ids_[r]);
    put(out, doc_lengths_[r]);
  }
  // Terms in sorted order so identical corpora give identical files.
  std::vector<const std::string*> terms;
  terms.reserve(postings_.size());
  for (const auto& [term, _] : postings_) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
  put(out, static_cast<std::uint64_t>(terms.size()));
  for (const auto* term : terms) {
    const auto& list = postings_.at(*term);
    put_string(out, *term);
    put(out, static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      put(out, p.doc_row);
      put(out, p.tf);
    }
  }
  if (!out) throw DataError(fmt::format("short write to {}", path.string()));
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open index {}", path.string()));
  char magic[sizeof(kIndexMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kIndexMagic))) {
    throw DataError(fmt::format("{} is not a humir BM25 index", path.string()));
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kIndexVersion) {
    throw DataError(fmt::format("{}: unsupported index version {}", path.string(), version));
  }
  InvertedIndex idx;
  const auto n_docs = get<std::uint64_t>(in);
  for (std::uint64_t r = 0; r < n_docs; ++r) {
    idx.doc_ids_.push_back(get_string(in));
    idx.doc_lengths_.push_back(get<std::uint32_t>(in));
  }
  const auto n_terms = get<std::uint64_t>(in);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    auto term = get_string(in);
    const auto n = get<std::uint32_t>(in);
    std::vector<Posting> list(n);
    for (auto& p : list) {
      p.doc_row = get<std::uint32_t>(in);
      p.tf = get<std::uint32_t>(in);
      if (p.doc_row >= n_docs || p.tf == 0) {
        throw DataError(fmt::format("{}: corrupt posting for '{}'", path.string(), term));
      }
    }
    idx.postings_.emplace(std::move(term), std::move(list));
  }
  idx.finalize();
  return idx;
}

double bm25_idf(std::size_t num_docs, std::size_t doc_freq) {
  const double n = static_cast<double>(num_docs);
  const double df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_score(const InvertedIndex& idx, const Bm25Params& params,
                  std::span<const std::string> topic_tokens, std::size_t doc_row) {
  double score = 0.0;
  const double len_norm =
      1.0 - params.b + params.b * static_cast<double>(idx.doc_length(doc_row)) / idx.avgdl();
  for (const auto& term : topic_tokens) {
    const auto list = idx.postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc_row,
                               [](const Posting& p, std::size_t row) { return p.doc_row < row; });
    if (it == list.end() || it->doc_row != doc_row) continue;
    const double f = it->tf;
    score += bm25_idf(idx.num_docs(), list.size()) * f * (params.k1 + 1.0) /
             (f + params.k1 * len_norm);
  }
  return score;
}

RankedList retrieve_bm25(const InvertedIndex& idx, const Bm25Params& params,
                         const Topic& topic, std::size_t k) {
  params.validate();
  if (k == 0) throw DataError("retrieval depth k must be >= 1");
  RankedList out{topic.topic_id, {}};
  if (idx.num_docs() == 0) return out;

  // Term-at-a-time accumulation; per-document sums follow query-token order,
  // matching bm25_score exactly.
  std::vector<double> acc(idx.num_docs(), 0.0);
  std::vector<bool> touched(idx.num_docs(), false);
  const auto tokens = tokenize(topic.text);
  for (const auto& term : tokens) {
    const auto list = idx.postings(term);
    if (list.empty()) continue;
    const double idf = bm25_idf(idx.num_docs(), list.size());
    for (const auto& p : list) {
      const double f = p.tf;
      const double len_norm = 1.0 - params.b +
                              params.b * static_cast<double>(idx.doc_length(p.doc_row)) /
                                  idx.avgdl();
      acc[p.doc_row] += idf * f * (params.k1 + 1.0) / (f + params.k1 * len_norm);
      touched[p.doc_row] = true;
    }
  }
  std::vector<ScoredDoc> hits;
  for (std::size_t row = 0; row < acc.size(); ++row) {
    if (touched[row] && acc[row] > 0.0) hits.push_back({idx.doc_id(row), acc[row]});
  }
  sort_and_truncate(hits, k);
  out.entries = std::move(hits);
  return out;
}

}  // namespace humir
