// include/ava/metrics.hpp

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

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ava/common.hpp"
#include "ava/signal.hpp"

namespace ava {

// Minimum insertions + deletions + substitutions, O(|a|*|b|) DP.
template <typename Seq>
int levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<std::string> split_words(const std::string& s);

// Lowercase fold and drop symbols outside the scoring alphabet
// (a-z, space, apostrophe); applied to both sides before scoring.
std::string normalize_for_scoring(const std::string& s);

// 100 * char edits / reference length. The reference must be nonempty.
double cer(const std::string& ref, const std::string& hyp);

// 100 * word edits / reference word count, words split at blanks.
double wer(const std::string& ref, const std::string& hyp);

struct ScoredPair {
  std::string reference;
  std::string hypothesis;
  int char_edits = 0;
  int word_edits = 0;
  int ref_chars = 0;
  int ref_words = 0;
};

ScoredPair score_pair(const std::string& ref, const std::string& hyp);

// Corpus-level micro average: total edits / total reference mass, in percent.
struct AggregateScore {
  double cer = 0.0;
  double wer = 0.0;
  int n_utts = 0;
};

AggregateScore aggregate(const std::vector<ScoredPair>& pairs);

// One grid cell per (model, noise, snr); the clean condition is encoded as
// snr_db = "clean".
struct GridCell {
  std::string model;     // "a", "av-align", "av-cat"
  std::string noise;     // "wgn", "cafe", "street"
  std::string snr_db;    // "clean" or a decibel number
  double cer = 0.0;
  double wer = 0.0;
  int n_utts = 0;
};

struct ResultsGrid {
  std::vector<GridCell> cells;

  // header: model,noise,snr_db,cer,wer,n_utts ; two-decimal fixed point
  std::string to_csv() const;
  static ResultsGrid from_csv(const std::string& text);

  // The clean column must be identical across noise kinds of one model.
  void validate() const;
};

}  // namespace ava
