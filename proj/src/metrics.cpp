// src/metrics.cpp

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

#include "ava/metrics.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace ava {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string normalize_for_scoring(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if ((l >= 'a' && l <= 'z') || l == ' ' || l == '\'') out.push_back(l);
  }
  return out;
}

double cer(const std::string& ref, const std::string& hyp) {
  if (ref.empty()) throw DataError("cer: empty reference");
  return 100.0 * levenshtein(ref, hyp) / static_cast<double>(ref.size());
}

double wer(const std::string& ref, const std::string& hyp) {
  const auto ref_words = split_words(ref);
  if (ref_words.empty()) throw DataError("wer: reference has no words");
  const auto hyp_words = split_words(hyp);
  return 100.0 * levenshtein(ref_words, hyp_words) / static_cast<double>(ref_words.size());
}

ScoredPair score_pair(const std::string& ref, const std::string& hyp) {
  ScoredPair p;
  p.reference = normalize_for_scoring(ref);
  p.hypothesis = normalize_for_scoring(hyp);
  if (p.reference.empty()) throw DataError("score_pair: empty reference after normalization");
  p.char_edits = levenshtein(p.reference, p.hypothesis);
  p.ref_chars = static_cast<int>(p.reference.size());
  const auto rw = split_words(p.reference);
  const auto hw = split_words(p.hypothesis);
  p.word_edits = levenshtein(rw, hw);
  p.ref_words = static_cast<int>(rw.size());
  return p;
}

AggregateScore aggregate(const std::vector<ScoredPair>& pairs) {
  if (pairs.empty()) throw DataError("aggregate: no scored pairs");
  long ce = 0, cc = 0, we = 0, wc = 0;
  for (const auto& p : pairs) {
    ce += p.char_edits;
    cc += p.ref_chars;
    we += p.word_edits;
    wc += p.ref_words;
  }
  AggregateScore s;
  s.cer = 100.0 * static_cast<double>(ce) / static_cast<double>(cc);
  s.wer = wc > 0 ? 100.0 * static_cast<double>(we) / static_cast<double>(wc) : 0.0;
  s.n_utts = static_cast<int>(pairs.size());
  return s;
}

std::string ResultsGrid::to_csv() const {
  std::string out = "model,noise,snr_db,cer,wer,n_utts\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.2f,%.2f,%d\n", c.model.c_str(), c.noise.c_str(),
                  c.snr_db.c_str(), c.cer, c.wer, c.n_utts);
    out += buf;
  }
  return out;
}

ResultsGrid ResultsGrid::from_csv(const std::string& text) {
  ResultsGrid g;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "model,noise,snr_db,cer,wer,n_utts") {
    throw DataError("results CSV: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    GridCell c;
    std::string cer_s, wer_s, n_s;
    if (!std::getline(ls, c.model, ',') || !std::getline(ls, c.noise, ',') ||
        !std::getline(ls, c.snr_db, ',') || !std::getline(ls, cer_s, ',') ||
        !std::getline(ls, wer_s, ',') || !std::getline(ls, n_s)) {
      throw DataError("results CSV: bad row: " + line);
    }
    c.cer = std::stod(cer_s);
    c.wer = std::stod(wer_s);
    c.n_utts = std::stoi(n_s);
    g.cells.push_back(std::move(c));
  }
  return g;
}

void ResultsGrid::validate() const {
  for (const auto& c : cells) {
    if (c.cer < 0 || c.wer < 0) throw DataError("grid: negative error rate");
  }
  // clean column equality per model
  for (const auto& a : cells) {
    if (a.snr_db != "clean") continue;
    for (const auto& b : cells) {
      if (b.snr_db == "clean" && a.model == b.model) {
        if (std::abs(a.cer - b.cer) > 1e-9 || std::abs(a.wer - b.wer) > 1e-9) {
          throw DataError("grid: clean column differs across noise kinds for model " + a.model);
        }
      }
    }
  }
}

}  // namespace ava
