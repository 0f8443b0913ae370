// include/ava/signal.hpp

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

#include <cstdint>
#include <string>

#include "ava/common.hpp"
#include "ava/wav.hpp"

namespace ava {

constexpr int kAudioRateHz = 22050;

enum class NoiseKind { kNone, kWhiteGaussian, kCafeteria, kStreet };

NoiseKind noise_kind_from_string(const std::string& s);
std::string to_string(NoiseKind k);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Windowed-sinc polyphase resampling to target_hz; duration is preserved
// within one sample period. Identity when the rate already matches.
Waveform resample(const Waveform& w, int target_hz = kAudioRateHz);

// Mean square over the whole utterance.
double mean_power(const Waveform& w);

// signal + k * noise with k = sqrt(P_s / (P_n * 10^(snr_db/10))); the noise
// is looped or truncated to the signal length first. Both inputs must share
// a sample rate.
Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db);

// SNR implied by a (signal, scaled-noise) pair, for verification.
double measure_snr_db(const Waveform& signal, const Waveform& scaled_noise);

// Synthesizes `n` samples of the given noise kind. Cafeteria is a babble
// stand-in (20 amplitude-modulated speech-band tones); street is pink noise
// plus transient bursts. Deterministic in the rng state.
Waveform make_noise(NoiseKind kind, std::size_t n, int sample_rate, Rng& rng);

// Convenience: corrupt `signal` per spec; returns the input unchanged for
// kind none.
Waveform apply_noise(const Waveform& signal, const NoiseSpec& spec);

}  // namespace ava
