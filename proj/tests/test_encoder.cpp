// tests/test_encoder.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ava/encoder.hpp"
#include "ava/features.hpp"
#include "ava/gradcheck.hpp"
#include "ava/signal.hpp"

using namespace ava;
using D = Tensor<double>;

namespace {

D random_seq(int t, int dim, Rng& rng) {
  D s({t, dim});
  for (auto& v : s.values()) v = rng.normal() * 0.5;
  return s;
}

}  // namespace

TEST_CASE("length-1 sequence: memory is one row equal to the top-layer state") {
  ParamStore<double> ps;
  Rng rng(1);
  auto stack = make_lstm_stack(ps, "enc", 5, 8, 3, rng);
  D item = random_seq(1, 5, rng);
  auto out = stack.encode(nullptr, pad_batch<double>({item}));
  REQUIRE(out.memory_steps.size() == 1);
  D mem = out.item_memory(nullptr, 0);
  CHECK(mem.shape() == std::vector<int>{1, 8});
  const auto& [h, c] = out.finals.back();
  for (int j = 0; j < 8; ++j) CHECK(mem.at(0, j) == doctest::Approx(h.at(0, j)));
}

TEST_CASE("padding invariance: alone vs padded batch") {
  ParamStore<double> ps;
  Rng rng(2);
  auto stack = make_lstm_stack(ps, "enc", 6, 8, 3, rng);
  D a = random_seq(3, 6, rng);
  D b = random_seq(5, 6, rng);

  auto alone = stack.encode(nullptr, pad_batch<double>({a}));
  auto batched = stack.encode(nullptr, pad_batch<double>({a, b}));

  D mem_alone = alone.item_memory(nullptr, 0);
  D mem_batched = batched.item_memory(nullptr, 0);
  REQUIRE(mem_alone.shape() == mem_batched.shape());
  for (std::size_t i = 0; i < mem_alone.numel(); ++i) {
    CHECK(mem_alone.values()[i] == doctest::Approx(mem_batched.values()[i]).epsilon(1e-6));
  }
  for (std::size_t l = 0; l < alone.finals.size(); ++l) {
    for (int j = 0; j < 8; ++j) {
      CHECK(alone.finals[l].first.at(0, j) ==
            doctest::Approx(batched.finals[l].first.at(0, j)).epsilon(1e-6));
      CHECK(alone.finals[l].second.at(0, j) ==
            doctest::Approx(batched.finals[l].second.at(0, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("memory rows beyond an item's true length are zero") {
  ParamStore<double> ps;
  Rng rng(3);
  auto stack = make_lstm_stack(ps, "enc", 4, 6, 2, rng);
  D a = random_seq(2, 4, rng);
  D b = random_seq(6, 4, rng);
  auto out = stack.encode(nullptr, pad_batch<double>({a, b}));
  for (int t = 2; t < 6; ++t) {
    for (int j = 0; j < 6; ++j) {
      CHECK(out.memory_steps[t].at(0, j) == 0.0);
    }
  }
  // memory length equals the input length per item
  CHECK(out.item_memory(nullptr, 0).rows() == 2);
  CHECK(out.item_memory(nullptr, 1).rows() == 6);
}

TEST_CASE("zero-length item is a data error") {
  ParamStore<double> ps;
  Rng rng(4);
  auto stack = make_lstm_stack(ps, "enc", 4, 6, 2, rng);
  D empty({0, 4});
  CHECK_THROWS_AS(pad_batch<double>({empty}), DataError);
  PaddedBatch<double> forged;
  forged.steps = {D({1, 4})};
  forged.lengths = {0};
  CHECK_THROWS_AS(stack.encode(nullptr, forged), DataError);
}

TEST_CASE("1.0 s of audio vs 1.0 s of video: memory lengths 98 and 30") {
  ParamStore<double> ps;
  Rng rng(5);
  auto audio_enc = make_lstm_stack(ps, "audio", kFeatureDim, 32, 3, rng);
  auto video_enc = make_lstm_stack(ps, "video", 16, 32, 3, rng);

  Waveform w;
  w.sample_rate = kAudioRateHz;
  w.samples.resize(22050);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.3 * std::sin(2 * M_PI * 440 * i / 22050.0);
  }
  D audio_feats = acoustic_features(w);
  D video_feats = random_seq(30, 16, rng);  // 30 FPS for one second

  auto a = audio_enc.encode(nullptr, pad_batch<double>({audio_feats}));
  auto v = video_enc.encode(nullptr, pad_batch<double>({video_feats}));
  CHECK(a.item_memory(nullptr, 0).rows() == 98);
  CHECK(v.item_memory(nullptr, 0).rows() == 30);
  CHECK(98.0 / 30.0 == doctest::Approx(10.0 / 3.0).epsilon(0.02));
}

TEST_CASE("encoder summary concatenates every layer's final h and c") {
  ParamStore<double> ps;
  Rng rng(6);
  auto stack = make_lstm_stack(ps, "enc", 4, 6, 3, rng);
  D a = random_seq(3, 4, rng);
  auto out = stack.encode(nullptr, pad_batch<double>({a}));
  D s = out.summary(nullptr);
  CHECK(s.shape() == std::vector<int>{1, 2 * 3 * 6});
  for (int l = 0; l < 3; ++l) {
    for (int j = 0; j < 6; ++j) {
      CHECK(s.at(0, 12 * l + j) == out.finals[l].first.at(0, j));
      CHECK(s.at(0, 12 * l + 6 + j) == out.finals[l].second.at(0, j));
    }
  }
}

TEST_CASE("gradient check through a 2-layer 4-unit length-3 stack") {
  ParamStore<double> ps;
  Rng rng(7);
  auto stack = make_lstm_stack(ps, "enc", 3, 4, 2, rng);
  PaddedBatch<double> batch;
  batch.lengths = {3};
  for (int t = 0; t < 3; ++t) {
    D step({1, 3}, true);
    for (auto& v : step.values()) v = rng.normal() * 0.5;
    batch.steps.push_back(step);
  }
  D w({4, 1});
  for (auto& v : w.values()) v = rng.normal();
  auto fwd = [&](Tape<double>* t) {
    auto out = stack.encode(t, batch);
    return mean_all(t, tanh_op(t, matmul(t, out.item_memory(t, 0), w)));
  };
  auto rep = gradient_check(fwd, {&batch.steps[0], &batch.steps[1], &batch.steps[2],
                                  &stack.layers[0].w, &stack.layers[0].b, &stack.layers[1].w,
                                  &stack.layers[1].b},
                            1e-5);
  CHECK_MESSAGE(rep.max_rel_err < 1e-4, rep.str());
}
