// include/ava/features.hpp

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

// Acoustic feature pipeline: 25 ms / 10 ms framed log-mel (30 bands over
// 80-11025 Hz, 1024-point FFT) plus first and second order deltas, giving
// 90-dimensional frames at a 10 ms period.

#include <string>
#include <vector>

#include "ava/tensor.hpp"
#include "ava/wav.hpp"

namespace ava {

constexpr int kMelBands = 30;
constexpr int kFeatureDim = 90;           // 30 log-mel + 30 delta + 30 delta-delta
constexpr int kWindowSamples = 551;       // 25 ms at 22050 Hz
constexpr int kHopSamples = 220;          // 10 ms
constexpr int kFftSize = 1024;
constexpr double kMelLowHz = 80.0;
constexpr double kMelHighHz = 11025.0;
constexpr double kLogFloor = 1e-10;

inline int frame_count(std::size_t n_samples) {
  if (n_samples < kWindowSamples) return 0;
  return 1 + static_cast<int>((n_samples - kWindowSamples) / kHopSamples);
}

// HTK-style mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank over the one-sided magnitude spectrum.
class MelFilterbank {
 public:
  MelFilterbank(int bands, int fft_size, int sample_rate, double lo_hz, double hi_hz);

  int bands() const { return bands_; }
  int bins() const { return bins_; }
  // weight of fft bin `k` in band `b`
  double weight(int b, int k) const { return weights_[static_cast<std::size_t>(b) * bins_ + k]; }
  double center_hz(int b) const { return centers_hz_[b]; }
  double filter_sum(int b) const { return filter_sums_[b]; }

  void apply(const std::vector<double>& magnitude, double* out) const;

 private:
  int bands_;
  int bins_;
  std::vector<double> weights_;     // [bands x bins]
  std::vector<double> centers_hz_;  // triangle peaks
  std::vector<double> filter_sums_;
};

const MelFilterbank& default_filterbank();

// [T x 30] log-mel matrix; w must already be at 22050 Hz.
Tensor<double> log_mel_spectrogram(const Waveform& w);

// Appends regression deltas (window +-2, edge replication) and delta-deltas:
// [T x 30] -> [T x 90], column order [mel | delta | delta-delta].
Tensor<double> append_deltas(const Tensor<double>& mel);

// Full pipeline at 22050 Hz input.
Tensor<double> acoustic_features(const Waveform& w);

// Per-dimension global normalization statistics, estimated on the training
// set and stored with the checkpoint.
struct FeatureNorm {
  std::vector<double> mean = std::vector<double>(kFeatureDim, 0.0);
  std::vector<double> inv_std = std::vector<double>(kFeatureDim, 1.0);

  void fit(const std::vector<Tensor<double>>& sequences);
  void apply(Tensor<double>& features) const;
};

// Feature cache file: "AVFE", T, dim as little-endian u32, then float32 data.
void write_feature_cache(const std::string& path, const Tensor<double>& features);
Tensor<double> read_feature_cache(const std::string& path);

// Full-precision text round trip, used to carry the normalization statistics
// inside checkpoint metadata.
std::string feature_norm_to_text(const FeatureNorm& norm);
FeatureNorm feature_norm_from_text(const std::string& text);

}  // namespace ava
