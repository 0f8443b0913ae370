// src/corpus.cpp

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

#include "ava/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ava/visual.hpp"
#include "ava/vocab.hpp"

namespace fs = std::filesystem;

namespace ava {

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  if (!std::getline(in, line) || line != "utterance_id,audio_path,video_path,transcript") {
    throw DataError("manifest: bad header in " + path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!std::getline(ls, e.utterance_id, ',') || !std::getline(ls, e.audio_path, ',') ||
        !std::getline(ls, e.video_path, ',') || !std::getline(ls, e.transcript)) {
      throw DataError("manifest: bad row: " + line);
    }
    if (e.transcript.empty()) throw DataError("manifest: empty transcript for " + e.utterance_id);
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << "utterance_id,audio_path,video_path,transcript\n";
  for (const auto& e : entries) {
    out << e.utterance_id << ',' << e.audio_path << ',' << e.video_path << ',' << e.transcript
        << '\n';
  }
}

void SyntheticSpec::validate() const {
  if (n_utterances < 1) throw ConfigError("synthetic corpus: n_utterances must be positive");
  if (chars_min < 1 || chars_max < chars_min) {
    throw ConfigError("synthetic corpus: bad chars_per_utterance range");
  }
  if (inventory < 1 || inventory > 26) {
    throw ConfigError("synthetic corpus: inventory exceeds the 26-glyph/chord capacity");
  }
  std::vector<bool> used(26, false);
  for (auto [a, b] : ambiguity_pairs) {
    const int ia = a - 'a', ib = b - 'a';
    if (ia < 0 || ib < 0 || ia >= inventory || ib >= inventory || ia == ib) {
      throw ConfigError(std::string("synthetic corpus: bad ambiguity pair '") + a + b + "'");
    }
    if (used[ia] || used[ib]) {
      throw ConfigError("synthetic corpus: ambiguity pairs must be disjoint");
    }
    used[ia] = used[ib] = true;
  }
}

// HTK mel helpers, duplicated scale constants from the filterbank so the
// chords land on distinct mel bands.
namespace {
double chord_mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
double chord_hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
}  // namespace

std::vector<double> char_chord(int char_idx) {
  if (char_idx < 0 || char_idx >= 26) {
    throw ConfigError("char_chord: index " + std::to_string(char_idx) + " exceeds capacity");
  }
  // Each character is a unique pair of tones centred on distinct mel bands
  // of the 30-band 80-11025 Hz analysis: separable when clean, but buried
  // together under broadband noise.
  const double mel_lo = chord_hz_to_mel(80.0);
  const double mel_hi = chord_hz_to_mel(11025.0);
  auto band_center = [&](int band) {
    return chord_mel_to_hz(mel_lo + (mel_hi - mel_lo) * (band + 1) / 31.0);
  };
  const double f1 = band_center(2 + char_idx);
  const double f2 = band_center(2 + (char_idx * 11 + 5) % 26);

  std::vector<double> out(kCharSamples, 0.0);
  const int ramp = kCharSamples / 20;  // 5 ms raised-cosine edges
  for (int i = 0; i < kCharSamples; ++i) {
    const double t = static_cast<double>(i) / kAudioRateHz;
    double s = std::sin(2.0 * M_PI * f1 * t) + 0.7 * std::sin(2.0 * M_PI * f2 * t);
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(M_PI * i / ramp);
    if (i >= kCharSamples - ramp) {
      env = 0.5 - 0.5 * std::cos(M_PI * (kCharSamples - 1 - i) / ramp);
    }
    out[i] = 0.26 * env * s;
  }
  return out;
}

Tensor<double> char_glyph(int glyph_idx, std::uint64_t corpus_seed) {
  Rng rng(fnv1a64("glyph", corpus_seed) ^ (0x9e37u + static_cast<std::uint64_t>(glyph_idx) * 0x85ebca6bull));
  Tensor<double> g({kFrameSize, kFrameSize, kFrameChannels});
  // a few random plane waves per channel give smooth, high-contrast patterns
  for (int c = 0; c < kFrameChannels; ++c) {
    const double ax = rng.uniform(-6.0, 6.0), ay = rng.uniform(-6.0, 6.0);
    const double bx = rng.uniform(-3.0, 3.0), by = rng.uniform(-3.0, 3.0);
    const double p1 = rng.uniform(0.0, 2.0 * M_PI), p2 = rng.uniform(0.0, 2.0 * M_PI);
    for (int y = 0; y < kFrameSize; ++y) {
      for (int x = 0; x < kFrameSize; ++x) {
        const double u = static_cast<double>(x) / kFrameSize;
        const double v = static_cast<double>(y) / kFrameSize;
        const double s =
            0.5 * std::sin(ax * u + ay * v + p1) + 0.3 * std::sin(bx * u + by * v + p2);
        g.at((y * kFrameSize + x) * kFrameChannels + c) = 0.5 + 0.5 * std::clamp(s, -1.0, 1.0);
      }
    }
  }
  return g;
}

int glyph_index(const SyntheticSpec& spec, char c) {
  for (auto [a, b] : spec.ambiguity_pairs) {
    const char lo = std::min(a, b), hi = std::max(a, b);
    if (c == hi) return lo - 'a';
  }
  return c - 'a';
}

Waveform render_audio(const std::string& transcript) {
  if (transcript.empty()) throw DataError("render_audio: empty transcript");
  Waveform w;
  w.sample_rate = kAudioRateHz;
  w.samples.reserve(transcript.size() * kCharSamples);
  for (char c : transcript) {
    if (c < 'a' || c > 'z') throw VocabError(std::string("synthetic transcript symbol '") + c + "'");
    const auto chord = char_chord(c - 'a');
    w.samples.insert(w.samples.end(), chord.begin(), chord.end());
  }
  return w;
}

Tensor<double> render_video(const SyntheticSpec& spec, const std::string& transcript) {
  const int n = static_cast<int>(transcript.size());
  const int frames = n * kFramesPerChar;
  Tensor<double> out({frames, kFrameSize, kFrameSize, kFrameChannels});
  const std::size_t fsz = static_cast<std::size_t>(kFrameSize) * kFrameSize * kFrameChannels;
  for (int f = 0; f < frames; ++f) {
    const char c = transcript[static_cast<std::size_t>(f / kFramesPerChar)];
    Tensor<double> glyph = char_glyph(glyph_index(spec, c), spec.seed);
    std::copy_n(glyph.data(), fsz, out.data() + static_cast<std::size_t>(f) * fsz);
  }
  return out;
}

std::vector<ManifestEntry> synthesize_corpus(const SyntheticSpec& spec,
                                             const std::string& out_dir) {
  spec.validate();
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "frames");

  Rng rng(spec.seed);
  std::vector<ManifestEntry> entries;
  for (int u = 0; u < spec.n_utterances; ++u) {
    const int len =
        spec.chars_min + static_cast<int>(rng.uniform_int(spec.chars_max - spec.chars_min + 1));
    std::string transcript;
    for (int i = 0; i < len; ++i) {
      transcript.push_back(static_cast<char>('a' + rng.uniform_int(spec.inventory)));
    }
    char id[32];
    std::snprintf(id, sizeof(id), "utt_%04d", u);

    Waveform audio = render_audio(transcript);
    if (spec.audio_noise.kind != NoiseKind::kNone) {
      NoiseSpec ns = spec.audio_noise;
      ns.seed = fnv1a64(id, spec.seed);
      audio = apply_noise(audio, ns);
    }
    ManifestEntry e;
    e.utterance_id = id;
    e.audio_path = (fs::path(out_dir) / "wav" / (std::string(id) + ".wav")).string();
    e.video_path = (fs::path(out_dir) / "frames" / (std::string(id) + ".frames")).string();
    e.transcript = transcript;
    write_wav16(e.audio_path, audio);
    write_frame_file(e.video_path, render_video(spec, transcript));
    std::ofstream txt(fs::path(out_dir) / (std::string(id) + ".txt"));
    txt << transcript << '\n';
    entries.push_back(std::move(e));
  }
  write_manifest((fs::path(out_dir) / "manifest.csv").string(), entries);
  return entries;
}

std::vector<std::vector<int>> make_batches(const std::vector<long>& sort_lengths, int batch_size,
                                           std::uint64_t seed) {
  if (sort_lengths.empty()) throw DataError("make_batches: empty manifest");
  if (batch_size < 1) throw ConfigError("make_batches: batch size must be positive");
  std::vector<int> order(sort_lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sort_lengths[a] < sort_lengths[b]; });

  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  // Fisher-Yates over batch order
  Rng rng(seed);
  for (std::size_t i = batches.size(); i > 1; --i) {
    std::swap(batches[i - 1], batches[rng.uniform_int(i)]);
  }
  return batches;
}

double padding_waste(const std::vector<long>& lengths,
                     const std::vector<std::vector<int>>& batches) {
  long total = 0, padded = 0;
  for (const auto& batch : batches) {
    long mx = 0;
    for (int idx : batch) mx = std::max(mx, lengths[idx]);
    for (int idx : batch) {
      padded += mx - lengths[idx];
      total += mx;
    }
  }
  return total > 0 ? static_cast<double>(padded) / static_cast<double>(total) : 0.0;
}

}  // namespace ava
