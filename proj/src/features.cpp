// src/features.cpp

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

#include "ava/features.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

#include "ava/kernels.hpp"
#include "ava/signal.hpp"

namespace ava {

MelFilterbank::MelFilterbank(int bands, int fft_size, int sample_rate, double lo_hz, double hi_hz)
    : bands_(bands), bins_(fft_size / 2 + 1) {
  weights_.assign(static_cast<std::size_t>(bands) * bins_, 0.0);
  centers_hz_.resize(bands);
  filter_sums_.assign(bands, 0.0);

  const double lo_mel = hz_to_mel(lo_hz);
  const double hi_mel = hz_to_mel(hi_hz);
  std::vector<double> edges_hz(bands + 2);
  for (int i = 0; i < bands + 2; ++i) {
    edges_hz[i] = mel_to_hz(lo_mel + (hi_mel - lo_mel) * i / (bands + 1));
  }
  for (int b = 0; b < bands; ++b) centers_hz_[b] = edges_hz[b + 1];

  for (int k = 0; k < bins_; ++k) {
    const double f = static_cast<double>(k) * sample_rate / fft_size;
    for (int b = 0; b < bands; ++b) {
      const double left = edges_hz[b], center = edges_hz[b + 1], right = edges_hz[b + 2];
      double w = 0.0;
      if (f > left && f < center) {
        w = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        w = (right - f) / (right - center);
      }
      weights_[static_cast<std::size_t>(b) * bins_ + k] = w;
      filter_sums_[b] += w;
    }
  }
}

void MelFilterbank::apply(const std::vector<double>& magnitude, double* out) const {
  for (int b = 0; b < bands_; ++b) {
    const double* w = weights_.data() + static_cast<std::size_t>(b) * bins_;
    double acc = 0.0;
    for (int k = 0; k < bins_; ++k) acc += w[k] * magnitude[static_cast<std::size_t>(k)];
    out[b] = std::log(acc);
  }
}

const MelFilterbank& default_filterbank() {
  static const MelFilterbank fb(kMelBands, kFftSize, kAudioRateHz, kMelLowHz, kMelHighHz);
  return fb;
}

Tensor<double> log_mel_spectrogram(const Waveform& w) {
  if (w.sample_rate != kAudioRateHz) {
    throw DataError("log_mel: expected " + std::to_string(kAudioRateHz) + " Hz input, got " +
                    std::to_string(w.sample_rate));
  }
  const int frames = frame_count(w.samples.size());
  if (frames < 1) {
    throw DataError("log_mel: utterance shorter than one window (" +
                    std::to_string(w.samples.size()) + " < " + std::to_string(kWindowSamples) +
                    " samples)");
  }

  static const std::vector<double> hann = [] {
    std::vector<double> win(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i) {
      win[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (kWindowSamples - 1));
    }
    return win;
  }();

  const MelFilterbank& fb = default_filterbank();
  Tensor<double> out({frames, kMelBands});

  std::vector<std::complex<double>> buf(kFftSize);
  std::vector<double> mag(fb.bins());
  for (int t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + static_cast<std::size_t>(t) * kHopSamples;
    for (int i = 0; i < kWindowSamples; ++i) buf[i] = {src[i] * hann[i], 0.0};
    for (int i = kWindowSamples; i < kFftSize; ++i) buf[i] = {0.0, 0.0};
    kernels::fft_radix2(buf);
    // one-sided magnitude spectrum, floored so silence stays finite
    for (int k = 0; k < fb.bins(); ++k) mag[k] = std::max(std::abs(buf[k]), kLogFloor);
    fb.apply(mag, out.data() + static_cast<std::size_t>(t) * kMelBands);
  }
  return out;
}

namespace {

// regression delta with +-2 window and edge replication:
//   d_t = sum_k k*(x_{t+k} - x_{t-k}) / (2 * sum_k k^2),  k = 1..2
void regression_deltas(const Tensor<double>& x, int cols, double* out) {
  const int t_max = x.rows() - 1;
  const double denom = 2.0 * (1.0 + 4.0);
  for (int t = 0; t <= t_max; ++t) {
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int k = 1; k <= 2; ++k) {
        const int tp = std::min(t + k, t_max);
        const int tm = std::max(t - k, 0);
        acc += k * (x.at(tp, j) - x.at(tm, j));
      }
      out[static_cast<std::size_t>(t) * cols + j] = acc / denom;
    }
  }
}

}  // namespace

Tensor<double> append_deltas(const Tensor<double>& mel) {
  const int t_len = mel.rows();
  const int m = mel.cols();
  Tensor<double> delta({t_len, m}), delta2({t_len, m});
  regression_deltas(mel, m, delta.data());
  regression_deltas(delta, m, delta2.data());

  Tensor<double> out({t_len, 3 * m});
  for (int t = 0; t < t_len; ++t) {
    std::memcpy(out.data() + static_cast<std::size_t>(t) * 3 * m,
                mel.data() + static_cast<std::size_t>(t) * m, m * sizeof(double));
    std::memcpy(out.data() + static_cast<std::size_t>(t) * 3 * m + m,
                delta.data() + static_cast<std::size_t>(t) * m, m * sizeof(double));
    std::memcpy(out.data() + static_cast<std::size_t>(t) * 3 * m + 2 * m,
                delta2.data() + static_cast<std::size_t>(t) * m, m * sizeof(double));
  }
  return out;
}

Tensor<double> acoustic_features(const Waveform& w) {
  Tensor<double> feats = append_deltas(log_mel_spectrogram(w));
  for (double v : feats.values()) {
    if (!std::isfinite(v)) throw NumericError("acoustic features contain non-finite values");
  }
  return feats;
}

void FeatureNorm::fit(const std::vector<Tensor<double>>& sequences) {
  std::vector<double> sum(kFeatureDim, 0.0), sq(kFeatureDim, 0.0);
  std::size_t count = 0;
  for (const auto& s : sequences) {
    for (int t = 0; t < s.rows(); ++t) {
      for (int j = 0; j < kFeatureDim; ++j) {
        const double v = s.at(t, j);
        sum[j] += v;
        sq[j] += v * v;
      }
      ++count;
    }
  }
  if (count == 0) throw DataError("feature normalization: no frames");
  for (int j = 0; j < kFeatureDim; ++j) {
    mean[j] = sum[j] / static_cast<double>(count);
    const double var = sq[j] / static_cast<double>(count) - mean[j] * mean[j];
    inv_std[j] = 1.0 / std::sqrt(std::max(var, 1e-8));
  }
}

void FeatureNorm::apply(Tensor<double>& features) const {
  for (int t = 0; t < features.rows(); ++t) {
    for (int j = 0; j < kFeatureDim; ++j) {
      features.at(t, j) = (features.at(t, j) - mean[j]) * inv_std[j];
    }
  }
}

void write_feature_cache(const std::string& path, const Tensor<double>& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature cache: " + path);
  const std::uint32_t t_len = static_cast<std::uint32_t>(features.rows());
  const std::uint32_t dim = static_cast<std::uint32_t>(features.cols());
  out.write("AVFE", 4);
  out.write(reinterpret_cast<const char*>(&t_len), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  std::vector<float> f32(features.values().begin(), features.values().end());
  out.write(reinterpret_cast<const char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
  if (!out) throw DataError("short write to feature cache: " + path);
}

std::string feature_norm_to_text(const FeatureNorm& norm) {
  char buf[32];
  std::string out;
  for (double v : norm.mean) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    out += buf;
  }
  out += ";";
  for (double v : norm.inv_std) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    out += buf;
  }
  return out;
}

FeatureNorm feature_norm_from_text(const std::string& text) {
  FeatureNorm norm;
  const auto semi = text.find(';');
  if (semi == std::string::npos) throw DataError("bad feature-norm metadata");
  auto parse = [](const std::string& s, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos < s.size()) {
      const auto comma = s.find(',', pos);
      if (comma == std::string::npos) break;
      out.push_back(std::stod(s.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  };
  parse(text.substr(0, semi), norm.mean);
  parse(text.substr(semi + 1), norm.inv_std);
  if (norm.mean.size() != kFeatureDim || norm.inv_std.size() != kFeatureDim) {
    throw DataError("feature-norm metadata has wrong dimension");
  }
  return norm;
}

Tensor<double> read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature cache: " + path);
  char magic[4];
  std::uint32_t t_len = 0, dim = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&t_len), 4);
  in.read(reinterpret_cast<char*>(&dim), 4);
  if (!in || std::memcmp(magic, "AVFE", 4) != 0) {
    throw DataError("bad feature cache header: " + path);
  }
  std::vector<float> f32(static_cast<std::size_t>(t_len) * dim);
  in.read(reinterpret_cast<char*>(f32.data()),
          static_cast<std::streamsize>(f32.size() * sizeof(float)));
  if (!in) throw DataError("truncated feature cache: " + path);
  Tensor<double> out({static_cast<int>(t_len), static_cast<int>(dim)});
  std::copy(f32.begin(), f32.end(), out.values().begin());
  return out;
}

}  // namespace ava
