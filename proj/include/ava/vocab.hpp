// include/ava/vocab.hpp

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

#include <string>
#include <vector>

#include "ava/common.hpp"

namespace ava {

// Character vocabulary: PAD/SOS/EOS specials, then a-z, space and
// apostrophe. Indices are dense and stable; PAD never appears in decoded
// output and space delimits words.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;

  static const Vocab& instance();

  int size() const { return static_cast<int>(symbols_.size()); }

  // Index of a plain character; throws VocabError for anything outside the
  // inventory.
  int index_of(char c) const;
  bool contains(char c) const;

  // Transcript -> symbol ids (no specials added).
  std::vector<int> encode(const std::string& text) const;

  // Symbol ids -> text; specials are dropped.
  std::string decode(const std::vector<int>& ids) const;

  char symbol(int id) const;

 private:
  Vocab();
  std::vector<char> symbols_;  // index -> char; specials use placeholders
  int char_index_[256];
};

}  // namespace ava
