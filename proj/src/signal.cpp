// src/signal.cpp

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

#include "ava/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ava {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::kNone;
  if (s == "wgn" || s == "white") return NoiseKind::kWhiteGaussian;
  if (s == "cafe" || s == "cafeteria") return NoiseKind::kCafeteria;
  if (s == "street") return NoiseKind::kStreet;
  throw ConfigError("unknown noise kind: " + s);
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kWhiteGaussian: return "wgn";
    case NoiseKind::kCafeteria: return "cafe";
    case NoiseKind::kStreet: return "street";
  }
  return "?";
}

Waveform resample(const Waveform& w, int target_hz) {
  if (w.samples.empty()) throw DataError("resample: empty waveform");
  if (w.sample_rate <= 0) throw DataError("resample: source rate must be positive");
  if (w.sample_rate == target_hz) return w;

  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) * target_hz / w.sample_rate));
  Waveform out;
  out.sample_rate = target_hz;
  out.samples.resize(std::max<std::size_t>(out_len, 1));

  // Low-pass at the smaller Nyquist, Hann-windowed sinc, 32 zero crossings.
  const double ratio = static_cast<double>(target_hz) / w.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to source Nyquist
  const int half_taps = static_cast<int>(std::ceil(32.0 / cutoff));
  const std::size_t n_in = w.samples.size();

  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double center = static_cast<double>(i) / ratio;
    const int lo = static_cast<int>(std::floor(center)) - half_taps + 1;
    const int hi = static_cast<int>(std::floor(center)) + half_taps;
    double acc = 0.0, wsum = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double t = (static_cast<double>(j) - center) * cutoff;
      const double win = 0.5 + 0.5 * std::cos(kPi * t / half_taps / cutoff);
      const double tap = sinc(t) * win;
      wsum += tap;
      if (j >= 0 && j < static_cast<int>(n_in)) acc += w.samples[static_cast<std::size_t>(j)] * tap;
    }
    out.samples[i] = wsum > 0 ? acc * (1.0 / wsum) : acc;
  }
  return out;
}

double mean_power(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.samples.size());
}

Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db) {
  if (signal.sample_rate != noise.sample_rate) {
    throw DataError("mix_at_snr: sample rates differ (" + std::to_string(signal.sample_rate) +
                    " vs " + std::to_string(noise.sample_rate) + ")");
  }
  if (!std::isfinite(snr_db)) throw DataError("mix_at_snr: SNR must be finite");
  if (noise.samples.empty()) throw DataError("mix_at_snr: empty noise");

  // loop or truncate the noise to the signal length
  std::vector<double> n(signal.samples.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = noise.samples[i % noise.samples.size()];

  double p_n = 0.0;
  for (double v : n) p_n += v * v;
  p_n /= static_cast<double>(n.size());
  const double p_s = mean_power(signal);
  if (p_n <= 0.0) throw DataError("mix_at_snr: noise has zero power");

  const double k = std::sqrt(p_s / (p_n * std::pow(10.0, snr_db / 10.0)));
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) out.samples[i] = signal.samples[i] + k * n[i];
  return out;
}

double measure_snr_db(const Waveform& signal, const Waveform& scaled_noise) {
  const double p_s = mean_power(signal);
  const double p_n = mean_power(scaled_noise);
  return 10.0 * std::log10(p_s / p_n);
}

Waveform make_noise(NoiseKind kind, std::size_t n, int sample_rate, Rng& rng) {
  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.assign(n, 0.0);
  switch (kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kWhiteGaussian: {
      for (auto& s : out.samples) s = rng.normal();
      break;
    }
    case NoiseKind::kCafeteria: {
      // 20 amplitude-modulated tones spread over the speech band
      const int kTalkers = 20;
      for (int t = 0; t < kTalkers; ++t) {
        const double f = rng.uniform(120.0, 2800.0);
        const double mod_f = rng.uniform(1.5, 7.0);  // syllabic-rate envelope
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double mod_phase = rng.uniform(0.0, 2.0 * kPi);
        const double amp = rng.uniform(0.3, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double time = static_cast<double>(i) / sample_rate;
          const double env = 0.5 * (1.0 + std::sin(2.0 * kPi * mod_f * time + mod_phase));
          out.samples[i] += amp * env * std::sin(2.0 * kPi * f * time + phase);
        }
      }
      break;
    }
    case NoiseKind::kStreet: {
      // pink noise (Paul Kellet's filter) plus sparse transient bursts
      double b0 = 0, b1 = 0, b2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double white = rng.normal();
        b0 = 0.99765 * b0 + white * 0.0990460;
        b1 = 0.96300 * b1 + white * 0.2965164;
        b2 = 0.57000 * b2 + white * 1.0526913;
        out.samples[i] = b0 + b1 + b2 + white * 0.1848;
      }
      const int bursts = 2 + static_cast<int>(rng.uniform_int(4));
      for (int b = 0; b < bursts; ++b) {
        const std::size_t start = rng.uniform_int(std::max<std::size_t>(n, 1));
        const std::size_t len = static_cast<std::size_t>(sample_rate / 50) +
                                rng.uniform_int(static_cast<std::size_t>(sample_rate / 20) + 1);
        const double amp = rng.uniform(2.0, 5.0);
        for (std::size_t i = start; i < std::min(n, start + len); ++i) {
          const double rel = static_cast<double>(i - start) / static_cast<double>(len);
          out.samples[i] += amp * std::exp(-4.0 * rel) * rng.normal();
        }
      }
      break;
    }
  }
  // normalize to unit RMS so mix_at_snr scaling starts from a known power
  double p = mean_power(out);
  if (p > 0) {
    const double g = 1.0 / std::sqrt(p);
    for (auto& s : out.samples) s *= g;
  }
  return out;
}

Waveform apply_noise(const Waveform& signal, const NoiseSpec& spec) {
  if (spec.kind == NoiseKind::kNone) return signal;
  Rng rng(spec.seed);
  Waveform noise = make_noise(spec.kind, signal.samples.size(), signal.sample_rate, rng);
  return mix_at_snr(signal, noise, spec.snr_db);
}

}  // namespace ava
