// include/ava/visual.hpp

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

// Residual CNN over 36x36x3 lip crops, one 128-d embedding per frame:
//   rescale [-1,1] -> conv3x3 (8) -> 4 full-preactivation residual stages
//   (8, 16, 24, 32 channels; strides 1,2,2,2) -> valid conv5x5 to 1x1x128.
// Normalization inside the blocks is per-channel instance norm by default
// (statistics-free, batch-size independent); true batch norm sits behind a
// config switch.

#include <string>
#include <vector>

#include "ava/ops_conv.hpp"
#include "ava/optim.hpp"

namespace ava {

constexpr int kFrameSize = 36;
constexpr int kFrameChannels = 3;
constexpr int kVisualDim = 128;

enum class VisualNorm { kInstance, kBatch };

inline VisualNorm visual_norm_from_string(const std::string& s) {
  if (s == "instance") return VisualNorm::kInstance;
  if (s == "batch") return VisualNorm::kBatch;
  throw ConfigError("unknown visual_norm: " + s);
}

// x' = 2x - 1 elementwise; inputs must lie in [0, 1].
template <typename Real>
Tensor<Real> rescale_frames(Tape<Real>* tape, const Tensor<Real>& frames) {
  for (Real v : frames.values()) {
    if (v < Real(0) || v > Real(1)) {
      throw DataError("rescale: pixel value outside [0,1]");
    }
  }
  Tensor<Real> ones = Tensor<Real>::full(frames.shape(), Real(1));
  return sub(tape, scale(tape, frames, Real(2)), ones);
}

template <typename Real>
struct NormLayer {
  Tensor<Real> gamma, beta;
  // batch-norm running statistics (unused in instance mode)
  Tensor<Real> run_mean, run_var;
  VisualNorm kind = VisualNorm::kInstance;

  Tensor<Real> forward(Tape<Real>* tape, const Tensor<Real>& x, bool training) {
    if (kind == VisualNorm::kInstance) {
      return instance_norm(tape, x, gamma, beta);
    }
    return batch_norm(tape, x, gamma, beta, run_mean, run_var, training);
  }
};

template <typename Real>
NormLayer<Real> make_norm(ParamStore<Real>& params, const std::string& name, int channels,
                          VisualNorm kind) {
  NormLayer<Real> n;
  n.kind = kind;
  n.gamma = params.create(name + "/gamma", {channels});
  n.beta = params.create(name + "/beta", {channels});
  std::fill(n.gamma.values().begin(), n.gamma.values().end(), Real(1));
  n.run_mean = Tensor<Real>({channels});
  n.run_var = Tensor<Real>::full({channels}, Real(1));
  return n;
}

// Full preactivation residual block: norm -> relu -> conv3x3(stride) ->
// norm -> relu -> conv3x3, plus the shortcut (identity, or a 1x1
// stride-matched projection when the shape changes).
template <typename Real>
struct ResidualBlock {
  NormLayer<Real> norm1, norm2;
  Tensor<Real> k1, k2;     // 3x3 convs (no bias inside the block)
  Tensor<Real> k_proj;     // 1x1 projection when c_in != c_out or stride != 1
  int c_in = 0, c_out = 0, stride = 1;

  bool has_projection() const { return c_in != c_out || stride != 1; }

  Tensor<Real> forward(Tape<Real>* tape, const Tensor<Real>& x, bool training) {
    if (x.ndim() != 4 || x.dim(3) != c_in) {
      throw DimensionError("residual block: input " + x.shape_str() + ", expected channels " +
                           std::to_string(c_in));
    }
    Tensor<Real> a = relu(tape, norm1.forward(tape, x, training));
    Tensor<Real> b = conv2d(tape, a, k1, stride, 1);
    Tensor<Real> d = relu(tape, norm2.forward(tape, b, training));
    Tensor<Real> res = conv2d(tape, d, k2, 1, 1);
    Tensor<Real> shortcut = has_projection() ? conv2d(tape, x, k_proj, stride, 0) : x;
    if (res.shape() != shortcut.shape()) {
      throw DimensionError("residual block: branch " + res.shape_str() + " vs shortcut " +
                           shortcut.shape_str());
    }
    return add(tape, res, shortcut);
  }
};

template <typename Real>
ResidualBlock<Real> make_residual_block(ParamStore<Real>& params, const std::string& name,
                                        int c_in, int c_out, int stride, VisualNorm norm,
                                        Rng& rng) {
  ResidualBlock<Real> b;
  b.c_in = c_in;
  b.c_out = c_out;
  b.stride = stride;
  b.norm1 = make_norm(params, name + "/norm1", c_in, norm);
  b.norm2 = make_norm(params, name + "/norm2", c_out, norm);
  b.k1 = params.create(name + "/k1", {3, 3, c_in, c_out});
  b.k2 = params.create(name + "/k2", {3, 3, c_out, c_out});
  glorot_init(b.k1, 9 * c_in, 9 * c_out, rng);
  glorot_init(b.k2, 9 * c_out, 9 * c_out, rng);
  if (b.has_projection()) {
    b.k_proj = params.create(name + "/k_proj", {1, 1, c_in, c_out});
    glorot_init(b.k_proj, c_in, c_out, rng);
  }
  return b;
}

// The whole per-frame embedding pipeline. Frames are independent, so a
// sequence is processed as one [T, 36, 36, 3] batch.
template <typename Real>
struct VisualFrontend {
  Tensor<Real> k_in, b_in;    // conv3x3 3->8, linear
  std::vector<ResidualBlock<Real>> blocks;
  Tensor<Real> k_out, b_out;  // conv5x5 valid 32->128, linear

  // frames [T, 36, 36, 3] in [0,1] -> [T, 128]
  Tensor<Real> embed(Tape<Real>* tape, const Tensor<Real>& frames, bool training) {
    Tensor<Real> x = frames;
    if (x.ndim() == 3) x = x.view({1, x.dim(0), x.dim(1), x.dim(2)});
    if (x.ndim() != 4 || x.dim(1) != kFrameSize || x.dim(2) != kFrameSize ||
        x.dim(3) != kFrameChannels) {
      throw DimensionError("visual frontend: input " + frames.shape_str() + ", expected [T x " +
                           std::to_string(kFrameSize) + " x " + std::to_string(kFrameSize) +
                           " x " + std::to_string(kFrameChannels) + "]");
    }
    const int t_len = x.dim(0);
    Tensor<Real> y = add_chanvec(tape, conv2d(tape, rescale_frames(tape, x), k_in, 1, 1), b_in);
    for (auto& blk : blocks) y = blk.forward(tape, y, training);
    y = add_chanvec(tape, conv2d(tape, y, k_out, 1, 0), b_out);  // [T,1,1,128]
    return y.view({t_len, kVisualDim});
  }
};

template <typename Real>
VisualFrontend<Real> make_visual_frontend(ParamStore<Real>& params, const std::string& name,
                                          VisualNorm norm, Rng& rng) {
  VisualFrontend<Real> v;
  v.k_in = params.create(name + "/k_in", {3, 3, kFrameChannels, 8});
  v.b_in = params.create(name + "/b_in", {8});
  glorot_init(v.k_in, 9 * kFrameChannels, 9 * 8, rng);
  const int chans[] = {8, 8, 16, 24, 32};
  const int strides[] = {1, 2, 2, 2};
  for (int s = 0; s < 4; ++s) {
    v.blocks.push_back(make_residual_block(params, name + "/block" + std::to_string(s), chans[s],
                                           chans[s + 1], strides[s], norm, rng));
  }
  v.k_out = params.create(name + "/k_out", {5, 5, 32, kVisualDim});
  v.b_out = params.create(name + "/b_out", {kVisualDim});
  glorot_init(v.k_out, 25 * 32, kVisualDim, rng);
  return v;
}

// Raw frame tensor file: header T, 36, 36, 3 as little-endian u32, then
// float32 pixel data in [0,1].
void write_frame_file(const std::string& path, const Tensor<double>& frames);
Tensor<double> read_frame_file(const std::string& path);

}  // namespace ava
