// tests/test_visual.cpp

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

#include <filesystem>

#include "ava/gradcheck.hpp"
#include "ava/visual.hpp"

using namespace ava;
using D = Tensor<double>;

namespace {

D random_frames(int t, Rng& rng) {
  D f({t, kFrameSize, kFrameSize, kFrameChannels});
  for (auto& v : f.values()) v = rng.uniform();
  return f;
}

}  // namespace

TEST_CASE("rescale maps [0,1] to [-1,1]") {
  D x = D::from({1, 1, 1, 3}, {0.5, 0.0, 1.0});
  D y = rescale_frames<double>(nullptr, x);
  CHECK(y.values()[0] == doctest::Approx(0.0));
  CHECK(y.values()[1] == doctest::Approx(-1.0));
  CHECK(y.values()[2] == doctest::Approx(1.0));

  Rng rng(1);
  D f = random_frames(1, rng);
  D g = rescale_frames<double>(nullptr, f);
  double mean_in = 0, mean_out = 0;
  for (double v : f.values()) mean_in += v;
  for (double v : g.values()) mean_out += v;
  mean_in /= static_cast<double>(f.numel());
  mean_out /= static_cast<double>(g.numel());
  CHECK(mean_out == doctest::Approx(2 * mean_in - 1).epsilon(1e-12));

  D bad = D::from({1, 1, 1, 1}, {1.5});
  CHECK_THROWS_AS(rescale_frames<double>(nullptr, bad), DataError);
}

TEST_CASE("stage shapes follow the architecture table") {
  ParamStore<double> ps;
  Rng rng(2);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);

  D x = random_frames(1, rng);
  D r = rescale_frames<double>(nullptr, x);
  D y = add_chanvec<double>(nullptr, conv2d<double>(nullptr, r, fe.k_in, 1, 1), fe.b_in);
  CHECK(y.shape() == std::vector<int>{1, 36, 36, 8});
  y = fe.blocks[0].forward(nullptr, y, false);
  CHECK(y.shape() == std::vector<int>{1, 36, 36, 8});
  y = fe.blocks[1].forward(nullptr, y, false);
  CHECK(y.shape() == std::vector<int>{1, 18, 18, 16});
  y = fe.blocks[2].forward(nullptr, y, false);
  CHECK(y.shape() == std::vector<int>{1, 9, 9, 24});
  y = fe.blocks[3].forward(nullptr, y, false);
  CHECK(y.shape() == std::vector<int>{1, 5, 5, 32});
  y = add_chanvec<double>(nullptr, conv2d<double>(nullptr, y, fe.k_out, 1, 0), fe.b_out);
  CHECK(y.shape() == std::vector<int>{1, 1, 1, 128});
}

TEST_CASE("parameter count is frozen against the counting oracle") {
  ParamStore<double> ps;
  Rng rng(3);
  make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);

  // counting oracle from the layer schedule and the norm/shortcut decisions
  auto conv_params = [](int kh, int kw, int ci, int co) { return kh * kw * ci * co; };
  std::size_t expect = 0;
  expect += conv_params(3, 3, 3, 8) + 8;  // entry conv + bias
  const int chans[] = {8, 8, 16, 24, 32};
  const int strides[] = {1, 2, 2, 2};
  for (int s = 0; s < 4; ++s) {
    const int ci = chans[s], co = chans[s + 1];
    expect += 2 * ci;                      // norm1 gamma/beta
    expect += 2 * co;                      // norm2 gamma/beta
    expect += conv_params(3, 3, ci, co);   // k1
    expect += conv_params(3, 3, co, co);   // k2
    if (ci != co || strides[s] != 1) expect += conv_params(1, 1, ci, co);
  }
  expect += conv_params(5, 5, 32, 128) + 128;  // final conv + bias

  CHECK(ps.total_scalars() == expect);
  CHECK(ps.total_scalars() == 133680u);  // golden, derived once from the oracle
}

TEST_CASE("zero residual branch weights reduce the block to its shortcut") {
  ParamStore<double> ps;
  Rng rng(4);
  auto blk = make_residual_block(ps, "blk", 4, 4, 1, VisualNorm::kInstance, rng);
  std::fill(blk.k1.values().begin(), blk.k1.values().end(), 0.0);
  std::fill(blk.k2.values().begin(), blk.k2.values().end(), 0.0);
  D x({1, 6, 6, 4});
  for (auto& v : x.values()) v = rng.normal();
  D y = blk.forward(nullptr, x, false);
  CHECK(y.values() == x.values());
}

TEST_CASE("residual block rejects inputs off the channel schedule") {
  ParamStore<double> ps;
  Rng rng(5);
  auto blk = make_residual_block(ps, "blk", 8, 16, 2, VisualNorm::kInstance, rng);
  D x({1, 6, 6, 4});
  CHECK_THROWS_AS(blk.forward(nullptr, x, false), DimensionError);
}

TEST_CASE("residual block gradients match finite differences") {
  ParamStore<double> ps;
  Rng rng(6);
  auto blk = make_residual_block(ps, "blk", 2, 3, 2, VisualNorm::kInstance, rng);
  D x({1, 6, 6, 2}, true);
  for (auto& v : x.values()) v = rng.normal();
  D w({3, 1});
  for (auto& v : w.values()) v = rng.normal();
  auto fwd = [&](Tape<double>* t) {
    D y = blk.forward(t, x, true);
    return sum_all(t, tanh_op(t, matmul(t, y.view({static_cast<int>(y.numel()) / 3, 3}), w)));
  };
  auto rep = gradient_check(fwd, {&x, &blk.k1, &blk.k2, &blk.k_proj, &blk.norm1.gamma,
                                  &blk.norm1.beta, &blk.norm2.gamma, &blk.norm2.beta},
                            1e-5);
  CHECK_MESSAGE(rep.max_rel_err < 1e-4, rep.str());
}

TEST_CASE("single frame maps to a 1x128 embedding") {
  ParamStore<double> ps;
  Rng rng(7);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D frame = random_frames(1, rng);
  D emb = fe.embed(nullptr, frame, false);
  CHECK(emb.shape() == std::vector<int>{1, 128});
}

TEST_CASE("duplicated frames give identical embedding rows (per-frame independence)") {
  ParamStore<double> ps;
  Rng rng(8);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D one = random_frames(1, rng);
  D three({3, kFrameSize, kFrameSize, kFrameChannels});
  for (int t = 0; t < 3; ++t) {
    std::copy_n(one.data(), one.numel(), three.data() + t * one.numel());
  }
  D emb = fe.embed(nullptr, three, false);
  for (int t = 1; t < 3; ++t) {
    for (int j = 0; j < 128; ++j) {
      CHECK(emb.at(t, j) == doctest::Approx(emb.at(0, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-frame map is permutation equivariant over time") {
  ParamStore<double> ps;
  Rng rng(9);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D frames = random_frames(4, rng);
  D emb = fe.embed(nullptr, frames, false);

  const int perm[4] = {2, 0, 3, 1};
  D shuffled({4, kFrameSize, kFrameSize, kFrameChannels});
  const std::size_t fsz = frames.numel() / 4;
  for (int t = 0; t < 4; ++t) {
    std::copy_n(frames.data() + perm[t] * fsz, fsz, shuffled.data() + t * fsz);
  }
  D emb2 = fe.embed(nullptr, shuffled, false);
  for (int t = 0; t < 4; ++t) {
    for (int j = 0; j < 128; ++j) {
      CHECK(emb2.at(t, j) == doctest::Approx(emb.at(perm[t], j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("all-zero and all-one frames produce distinct embeddings") {
  ParamStore<double> ps;
  Rng rng(10);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D zeros({1, kFrameSize, kFrameSize, kFrameChannels});
  D ones = D::full({1, kFrameSize, kFrameSize, kFrameChannels}, 1.0);
  D e0 = fe.embed(nullptr, zeros, false);
  D e1 = fe.embed(nullptr, ones, false);
  double diff = 0;
  for (int j = 0; j < 128; ++j) diff += std::abs(e0.at(0, j) - e1.at(0, j));
  CHECK(diff > 1e-6);
}

TEST_CASE("wrong spatial size names the expected 36x36") {
  ParamStore<double> ps;
  Rng rng(11);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D bad({1, 24, 24, 3});
  try {
    fe.embed(nullptr, bad, false);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("36") != std::string::npos);
  }
}

TEST_CASE("end-to-end gradient check on a 2-frame batch (sampled coordinates)") {
  ParamStore<double> ps;
  Rng rng(12);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  D frames({2, kFrameSize, kFrameSize, kFrameChannels}, true);
  for (auto& v : frames.values()) v = 0.05 + 0.9 * rng.uniform();
  D w({128, 1});
  for (auto& v : w.values()) v = rng.normal();
  auto fwd = [&](Tape<double>* t) {
    return mean_all(t, tanh_op(t, matmul(t, fe.embed(t, frames, true), w)));
  };
  auto rep = gradient_check(fwd, {&frames, &fe.k_in, &fe.k_out, &fe.blocks[1].k1}, 1e-6, 1e-4,
                            /*max_coords_per_leaf=*/24);
  CHECK_MESSAGE(rep.max_rel_err < 1e-4, rep.str());
}

TEST_CASE("batch-norm mode trains and switches to running statistics") {
  ParamStore<double> ps;
  Rng rng(13);
  auto blk = make_residual_block(ps, "blk", 3, 3, 1, VisualNorm::kBatch, rng);
  D x({2, 5, 5, 3});
  for (auto& v : x.values()) v = rng.normal();
  D y_train = blk.forward(nullptr, x, true);
  CHECK(y_train.shape() == x.shape());
  // running stats moved off their init
  double moved = 0;
  for (double v : blk.norm1.run_mean.values()) moved += std::abs(v);
  CHECK(moved > 0.0);
  D y_eval = blk.forward(nullptr, x, false);
  CHECK(y_eval.shape() == x.shape());
  for (double v : y_eval.values()) CHECK(std::isfinite(v));
}

TEST_CASE("frame file round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ava_frames_test";
  fs::create_directories(dir);
  Rng rng(14);
  D f = random_frames(5, rng);
  const std::string path = (dir / "u0.frames").string();
  write_frame_file(path, f);
  D g = read_frame_file(path);
  REQUIRE(g.shape() == f.shape());
  for (std::size_t i = 0; i < f.numel(); ++i) {
    CHECK(g.values()[i] == doctest::Approx(f.values()[i]).epsilon(1e-6));
  }
  fs::remove_all(dir);
}
