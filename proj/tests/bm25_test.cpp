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

#include <gtest/gtest.h>

#include <random>

#include "humir/errors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace humir {
namespace {

using Tokens = std::vector<std::string>;

std::vector<Document> worked_corpus() {
  return {{"d1", "cat sat mat", {}}, {"d2", "cat cat runs", {}}, {"d3", "dog barks", {}}};
}

TEST(Tokenize, Rules) {
  EXPECT_EQ(tokenize("Why did the chicken?"), (Tokens{"why", "did", "the", "chicken"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("e-mail \xC3\x89"), (Tokens{"e", "mail", "\xC3\xA9"}));
  EXPECT_EQ(tokenize("  ..!! "), Tokens{});
  EXPECT_EQ(tokenize("abc123 x_y"), (Tokens{"abc123", "x", "y"}));
  // Greek capitals lowercase; CJK ideographs count as alphanumeric.
  EXPECT_EQ(tokenize("\xCE\x9B\xCE\x9F\xCE\x93\xCE\x9F\xCE\xA3 \xE4\xB8\xAD"),
            (Tokens{"\xCE\xBB\xCE\xBF\xCE\xB3\xCE\xBF\xCF\x83", "\xE4\xB8\xAD"}));
  EXPECT_EQ(tokenize("P\xC3\x83O n\xC3\xA3o"), (Tokens{"p\xC3\xA3o", "n\xC3\xA3o"}));
}

TEST(BuildIndex, WorkedCorpusStatistics) {
  auto idx = build_index(worked_corpus());
  EXPECT_EQ(idx.num_docs(), 3u);
  EXPECT_DOUBLE_EQ(idx.avgdl(), 8.0 / 3.0);
  EXPECT_EQ(idx.doc_freq("cat"), 2u);
  auto cat = idx.postings("cat");
  ASSERT_EQ(cat.size(), 2u);
  EXPECT_EQ(cat[0], (Posting{0, 1}));
  EXPECT_EQ(cat[1], (Posting{1, 2}));
  EXPECT_EQ(idx.doc_freq("zzz"), 0u);
}

TEST(BuildIndex, DegenerateCorpora) {
  auto empty = build_index({});
  EXPECT_EQ(empty.num_docs(), 0u);
  EXPECT_TRUE(retrieve_bm25(empty, {}, {"q", "cat"}, 5).empty());
  auto single = build_index({{"only", "one two three two", {}}});
  EXPECT_DOUBLE_EQ(single.avgdl(), 4.0);
}

TEST(Bm25Score, WorkedCorpusHandValues) {
  auto idx = build_index(worked_corpus());
  const Tokens q{"cat"};
  // k1=1.5, b=0.75: idf = ln 1.6; |d1|=|d2|=3, avgdl=8/3.
  EXPECT_NEAR(bm25_score(idx, {}, q, 0), 0.4449738501734775, 1e-12);
  EXPECT_NEAR(bm25_score(idx, {}, q, 1), 0.6454985466035854, 1e-12);
  EXPECT_EQ(bm25_score(idx, {}, q, 2), 0.0);
  EXPECT_EQ(bm25_score(idx, {}, Tokens{"zzz"}, 0), 0.0);
  // Repeated query terms count per occurrence.
  EXPECT_NEAR(bm25_score(idx, {}, Tokens{"cat", "cat"}, 1), 2 * 0.6454985466035854, 1e-12);
}

TEST(Bm25Score, ZeroBIgnoresLength) {
  auto idx = build_index({{"short", "pun", {}}, {"long", "pun a b c d e f g", {}}, {"x", "y", {}}});
  Bm25Params p{1.5, 0.0};
  const Tokens q{"pun"};
  EXPECT_DOUBLE_EQ(bm25_score(idx, p, q, 0), bm25_score(idx, p, q, 1));
  EXPECT_GT(bm25_score(idx, {}, q, 0), bm25_score(idx, {}, q, 1));
}

TEST(Bm25Score, IdfNeverNegative) {
  for (std::size_t n = 1; n < 50; ++n) {
    for (std::size_t df = 0; df <= n; ++df) EXPECT_GT(bm25_idf(n, df), 0.0);
  }
}

TEST(RetrieveBm25, WorkedCorpusOrder) {
  auto idx = build_index(worked_corpus());
  auto r = retrieve_bm25(idx, {}, {"q", "cat"}, 10);
  EXPECT_EQ(r.doc_ids(), (Tokens{"d2", "d1"}));
  EXPECT_TRUE(retrieve_bm25(idx, {}, {"q", "unicorn"}, 10).empty());
  auto top1 = retrieve_bm25(idx, {}, {"q", "cat"}, 1);
  ASSERT_EQ(top1.size(), 1u);
  EXPECT_EQ(top1.entries[0], r.entries[0]);
}

TEST(RetrieveBm25, ParameterValidation) {
  auto idx = build_index(worked_corpus());
  EXPECT_THROW(retrieve_bm25(idx, {0.0, 0.75}, {"q", "cat"}, 1), UsageError);
  EXPECT_THROW(retrieve_bm25(idx, {1.2, 1.5}, {"q", "cat"}, 1), UsageError);
  EXPECT_THROW(retrieve_bm25(idx, {}, {"q", "cat"}, 0), DataError);
}

const std::vector<std::string> kVocab{"pun", "joke", "cat", "dog", "word", "play",
                                      "ha",  "irony", "wit", "gag", "riddle"};

std::vector<Document> random_corpus(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> len(1, 12), term(0, kVocab.size() - 1);
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t t = len(rng); t > 0; --t) text += kVocab[term(rng)] + " ";
    docs.push_back({"d" + std::to_string(i), text, {}});
  }
  return docs;
}

TEST(RetrieveBm25, MatchesDirectFormulaOracle) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    auto docs = random_corpus(rng, 2 + trial);
    auto idx = build_index(docs);
    std::vector<Tokens> tokenized;
    for (const auto& d : docs) tokenized.push_back(tokenize(d.text));
    const std::string qtext = kVocab[trial % kVocab.size()] + " " + kVocab[(trial * 3) % kVocab.size()];
    const auto q = tokenize(qtext);
    std::vector<std::pair<std::string, double>> want;
    for (std::size_t r = 0; r < docs.size(); ++r) {
      const double s = oracle::bm25(tokenized, q, r, 1.5, 0.75);
      EXPECT_NEAR(bm25_score(idx, {}, q, r), s, 1e-9);
      if (s > 0) want.emplace_back(docs[r].doc_id, s);
    }
    std::sort(want.begin(), want.end(), [](auto& a, auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    auto got = retrieve_bm25(idx, {}, {"q", qtext}, docs.size());
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(got.entries[i].doc_id, want[i].first);
      EXPECT_NEAR(got.entries[i].score, want[i].second, 1e-9);
    }
  }
}

TEST(RetrieveBm25, ScoreStrictlyIncreasesWithTf) {
  std::string text = "pun";
  double prev = 0.0;
  for (int tf = 1; tf <= 8; ++tf) {
    auto idx = build_index({{"a", text + " x y z", {}}, {"b", "other words here", {}}});
    const double s = bm25_score(idx, {0.9, 0.0}, Tokens{"pun"}, 0);
    EXPECT_GT(s, prev) << "tf " << tf;
    prev = s;
    text += " pun";
  }
}

TEST(RetrieveBm25, AddingDocumentKeepsExistingPostings) {
  std::mt19937 rng(4);
  auto docs = random_corpus(rng, 10);
  auto before = build_index(docs);
  docs.push_back({"extra", "pun pun cat novel", {}});
  auto after = build_index(docs);
  for (const auto& term : kVocab) {
    auto old_list = before.postings(term);
    auto new_list = after.postings(term);
    ASSERT_GE(new_list.size(), old_list.size());
    for (std::size_t i = 0; i < old_list.size(); ++i) EXPECT_EQ(old_list[i], new_list[i]);
  }
}

TEST(InvertedIndexFile, SaveLoadRoundTrip) {
  testutil::TempDir dir;
  std::mt19937 rng(8);
  auto docs = random_corpus(rng, 25);
  auto idx = build_index(docs);
  idx.save(dir / "idx.bin");
  auto loaded = InvertedIndex::load(dir / "idx.bin");
  EXPECT_EQ(loaded.doc_ids(), idx.doc_ids());
  EXPECT_EQ(loaded.doc_lengths(), idx.doc_lengths());
  EXPECT_DOUBLE_EQ(loaded.avgdl(), idx.avgdl());
  for (const auto& term : kVocab) {
    auto a = idx.postings(term);
    auto b = loaded.postings(term);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  // Deterministic bytes.
  build_index(docs).save(dir / "again.bin");
  EXPECT_EQ(testutil::read_file(dir / "idx.bin"), testutil::read_file(dir / "again.bin"));

  testutil::write_file(dir / "junk.bin", "not an index at all");
  EXPECT_THROW(InvertedIndex::load(dir / "junk.bin"), DataError);
  auto bytes = testutil::read_file(dir / "idx.bin");
  testutil::write_file(dir / "trunc.bin", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(InvertedIndex::load(dir / "trunc.bin"), DataError);
}

}  // namespace
}  // namespace humir
