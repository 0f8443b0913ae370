// include/ava/fusion.hpp

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

// Cross-modal fusion layer: the top audio LSTM layer attends over the video
// encoder memory at every audio timestep, so its outputs are fused
// audio-visual representations. The decoder then sees only this fused
// memory and summary, like a uni-modal system. Video is never resampled;
// any (T_a, T_v) pair is aligned through the attention weights alone.

#include <utility>
#include <vector>

#include "ava/attention.hpp"
#include "ava/encoder.hpp"

namespace ava {

enum class FusionMix {
  kCellInput,  // context joins the top cell's input at step i (query h_{i-1})
  kPostMix,    // context is mixed with the cell output h_i after the step
};

inline FusionMix fusion_mix_from_string(const std::string& s) {
  if (s == "cell_input") return FusionMix::kCellInput;
  if (s == "post_mix") return FusionMix::kPostMix;
  throw ConfigError("unknown fusion_mix: " + s);
}

template <typename Real>
struct FusionOutput {
  std::vector<Tensor<Real>> memory_steps;        // per audio t: [B x H], masked
  std::pair<Tensor<Real>, Tensor<Real>> final_state;  // (h, c) at true lengths
  std::vector<int> lengths;                      // audio lengths
  int hidden = 0;
  // alignment matrices, one [T_a x T_v] row-stochastic matrix per item
  std::vector<std::vector<std::vector<double>>> alignments;

  Tensor<Real> item_memory(Tape<Real>* tape, int item) const {
    return stack_item_rows(tape, memory_steps, item, lengths[item]);
  }
};

template <typename Real>
struct FusionLayer {
  LstmWeights<Real> cell;    // input: audio_dim (+ video_dim for cell_input mix)
  Attention<Real> attn;      // queries: fused-layer state; values: video memory
  Tensor<Real> w_mix;        // post_mix only: [(H + video_dim) x H]
  FusionMix mix = FusionMix::kCellInput;
  int video_dim = 0;

  // audio: the lower audio layer's masked output steps; video_memories: one
  // [T_v x video_dim] matrix per item (fully encoded before fusion starts).
  FusionOutput<Real> fuse_encode(Tape<Real>* tape, const std::vector<Tensor<Real>>& audio_steps,
                                 const std::vector<int>& audio_lengths,
                                 const std::vector<Tensor<Real>>& video_memories) const {
    if (audio_steps.empty()) throw DataError("fuse_encode: empty audio input");
    const int batch = audio_steps[0].rows();
    if (static_cast<int>(video_memories.size()) != batch) {
      throw DimensionError("fuse_encode: one video memory per batch item required");
    }
    for (const auto& vm : video_memories) {
      if (vm.rows() == 0) {
        throw DataError("fuse_encode: empty video memory (the AV model needs both streams)");
      }
      if (vm.cols() != video_dim) {
        throw DimensionError("fuse_encode: video memory " + vm.shape_str() + ", expected dim " +
                             std::to_string(video_dim));
      }
    }
    const int t_max = static_cast<int>(audio_steps.size());
    const int hid = cell.hidden;

    FusionOutput<Real> out;
    out.lengths = audio_lengths;
    out.hidden = hid;
    out.alignments.assign(batch, {});

    // per-item attention projections, computed once
    std::vector<Tensor<Real>> projected;
    projected.reserve(batch);
    for (const auto& vm : video_memories) projected.push_back(attn.project(tape, vm));

    Tensor<Real> h({batch, hid});
    Tensor<Real> c({batch, hid});
    Tensor<Real> zero_ctx({1, video_dim});

    for (int t = 0; t < t_max; ++t) {
      Tensor<Real> mask({batch});
      Tensor<Real> inv({batch});
      for (int b = 0; b < batch; ++b) {
        mask.at(b) = t < audio_lengths[b] ? Real(1) : Real(0);
        inv.at(b) = Real(1) - mask.at(b);
      }

      Tensor<Real> h_new, c_new;
      if (mix == FusionMix::kCellInput) {
        // query with the previous fused state, feed the context into the cell
        std::vector<Tensor<Real>> ctx_rows;
        ctx_rows.reserve(batch);
        for (int b = 0; b < batch; ++b) {
          if (t < audio_lengths[b]) {
            auto [ctx, alpha] =
                attn.attend(tape, row(tape, h, b), video_memories[b], projected[b]);
            out.alignments[b].emplace_back(alpha.values().begin(), alpha.values().end());
            ctx_rows.push_back(ctx);
          } else {
            ctx_rows.push_back(zero_ctx);
          }
        }
        Tensor<Real> ctx_batch = concat_rows(tape, ctx_rows);
        Tensor<Real> cell_in = concat_cols(tape, audio_steps[t], ctx_batch);
        std::tie(h_new, c_new) = lstm_cell(tape, cell_in, h, c, cell);
        h = add(tape, mul_colvec(tape, h_new, mask), mul_colvec(tape, h, inv));
        c = add(tape, mul_colvec(tape, c_new, mask), mul_colvec(tape, c, inv));
        out.memory_steps.push_back(mul_colvec(tape, h, mask));
      } else {
        // plain cell step first, then mix the context into the output
        std::tie(h_new, c_new) = lstm_cell(tape, audio_steps[t], h, c, cell);
        h = add(tape, mul_colvec(tape, h_new, mask), mul_colvec(tape, h, inv));
        c = add(tape, mul_colvec(tape, c_new, mask), mul_colvec(tape, c, inv));
        std::vector<Tensor<Real>> mixed_rows;
        mixed_rows.reserve(batch);
        for (int b = 0; b < batch; ++b) {
          if (t < audio_lengths[b]) {
            Tensor<Real> q = row(tape, h, b);
            auto [ctx, alpha] = attn.attend(tape, q, video_memories[b], projected[b]);
            out.alignments[b].emplace_back(alpha.values().begin(), alpha.values().end());
            mixed_rows.push_back(tanh_op(tape, matmul(tape, concat_cols(tape, q, ctx), w_mix)));
          } else {
            mixed_rows.push_back(Tensor<Real>({1, hid}));
          }
        }
        out.memory_steps.push_back(concat_rows(tape, mixed_rows));
      }
    }
    out.final_state = {h, c};
    return out;
  }
};

template <typename Real>
FusionLayer<Real> make_fusion_layer(ParamStore<Real>& params, const std::string& name,
                                    int audio_dim, int video_dim, int hidden, int attn_dim,
                                    ScoreKind score, FusionMix mix, Rng& rng) {
  FusionLayer<Real> f;
  f.mix = mix;
  f.video_dim = video_dim;
  const int cell_in = mix == FusionMix::kCellInput ? audio_dim + video_dim : audio_dim;
  f.cell = make_lstm_weights(params, name + "/cell", cell_in, hidden, rng);
  f.attn = make_attention(params, name + "/attn", hidden, video_dim, attn_dim, score, rng);
  if (mix == FusionMix::kPostMix) {
    f.w_mix = params.create(name + "/w_mix", {hidden + video_dim, hidden});
    glorot_init(f.w_mix, hidden + video_dim, hidden, rng);
  }
  return f;
}

// Writes one alignment matrix as CSV (rows = audio steps, cols = video steps).
std::string alignment_to_csv(const std::vector<std::vector<double>>& alpha);

}  // namespace ava
