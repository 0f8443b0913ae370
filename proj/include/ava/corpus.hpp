// include/ava/corpus.hpp

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

// Data plumbing: manifests for prepared data, length-bucketed batching, and
// a seeded synthetic audio-visual corpus. Each synthetic character is a
// 100 ms tone chord on the audio side and a static glyph held for 3 video
// frames; characters in an ambiguity pair share a glyph (the same mouth
// shape explaining several sounds), so the video stream alone cannot
// separate them while the audio stream can.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ava/signal.hpp"
#include "ava/tensor.hpp"
#include "ava/wav.hpp"

namespace ava {

constexpr double kCharSeconds = 0.1;
constexpr int kCharSamples = 2205;  // 100 ms at 22050 Hz
constexpr int kVideoFps = 30;
constexpr int kFramesPerChar = 3;   // 100 ms at 30 FPS

struct ManifestEntry {
  std::string utterance_id;
  std::string audio_path;
  std::string video_path;
  std::string transcript;
};

std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int n_utterances = 20;
  int chars_min = 3;
  int chars_max = 6;
  int inventory = 12;  // the first `inventory` letters of a-z
  std::vector<std::pair<char, char>> ambiguity_pairs;  // disjoint, inside the inventory
  NoiseSpec audio_noise;  // baked into the WAV files when kind != none

  void validate() const;
};

// Deterministic per-character audio signature: a three-partial chord with
// raised-cosine onset/offset, 2205 samples.
std::vector<double> char_chord(int char_idx);

// Deterministic per-glyph 36x36x3 pattern in [0,1].
Tensor<double> char_glyph(int glyph_idx, std::uint64_t corpus_seed);

// glyph index for a character under the spec's ambiguity pairs (pairs share
// the lower member's glyph)
int glyph_index(const SyntheticSpec& spec, char c);

Waveform render_audio(const std::string& transcript);
Tensor<double> render_video(const SyntheticSpec& spec, const std::string& transcript);

// Generates WAVs, frame files, per-utterance transcripts and the manifest
// under out_dir; byte-identical for a given spec.
std::vector<ManifestEntry> synthesize_corpus(const SyntheticSpec& spec,
                                             const std::string& out_dir);

// Length-bucketed batching: indices sorted by length, grouped into
// consecutive batches, batch order shuffled by the seed. Every index
// appears exactly once.
std::vector<std::vector<int>> make_batches(const std::vector<long>& sort_lengths, int batch_size,
                                           std::uint64_t seed);

// Fraction of padded positions a batching induces (for bucketing tests).
double padding_waste(const std::vector<long>& lengths,
                     const std::vector<std::vector<int>>& batches);

}  // namespace ava
