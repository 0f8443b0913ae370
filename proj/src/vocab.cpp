// src/vocab.cpp

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

#include "ava/vocab.hpp"

#include <algorithm>

namespace ava {

Vocab::Vocab() {
  std::fill(std::begin(char_index_), std::end(char_index_), -1);
  symbols_.push_back('\0');  // PAD
  symbols_.push_back('\1');  // SOS
  symbols_.push_back('\2');  // EOS
  for (char c = 'a'; c <= 'z'; ++c) {
    char_index_[static_cast<unsigned char>(c)] = static_cast<int>(symbols_.size());
    symbols_.push_back(c);
  }
  char_index_[static_cast<unsigned char>(' ')] = static_cast<int>(symbols_.size());
  symbols_.push_back(' ');
  char_index_[static_cast<unsigned char>('\'')] = static_cast<int>(symbols_.size());
  symbols_.push_back('\'');
}

const Vocab& Vocab::instance() {
  static const Vocab v;
  return v;
}

bool Vocab::contains(char c) const { return char_index_[static_cast<unsigned char>(c)] >= 0; }

int Vocab::index_of(char c) const {
  const int idx = char_index_[static_cast<unsigned char>(c)];
  if (idx < 0) throw VocabError(std::string("symbol '") + c + "' is not in the vocabulary");
  return idx;
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(index_of(c));
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) throw VocabError("symbol index " + std::to_string(id));
    if (id == kPad || id == kSos || id == kEos) continue;
    out.push_back(symbols_[static_cast<std::size_t>(id)]);
  }
  return out;
}

char Vocab::symbol(int id) const {
  if (id < 0 || id >= size()) throw VocabError("symbol index " + std::to_string(id));
  return symbols_[static_cast<std::size_t>(id)];
}

}  // namespace ava
