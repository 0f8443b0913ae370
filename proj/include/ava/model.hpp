// include/ava/model.hpp

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

// The three systems under comparison, behind one interface:
//   a        -- 3-layer audio encoder, 4-head attention decoder
//   av-align -- 2 plain audio layers + a fused top layer that attends over
//               the video memory; the decoder sees only the fused stream
//   av-cat   -- independent audio/video encoders; the decoder runs dual
//               attention over both memories and is initialized from the
//               concatenated summaries

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ava/config.hpp"
#include "ava/decoder.hpp"
#include "ava/encoder.hpp"
#include "ava/features.hpp"
#include "ava/fusion.hpp"
#include "ava/visual.hpp"

namespace ava {

// One utterance, ready for the model: normalized audio features and raw
// video frames (empty tensor for the audio-only model).
template <typename Real>
struct ModelInput {
  Tensor<Real> audio;   // [T_a x 90]
  Tensor<Real> frames;  // [T_v x 36 x 36 x 3] or empty
  std::vector<int> target_ids;
  std::string utterance_id;
};

template <typename Real>
struct ModelForward {
  Tensor<Real> loss;
  // av-align alignment matrices per item ([T_a x T_v], row-stochastic)
  std::vector<std::vector<std::vector<double>>> alignments;
};

template <typename Real>
class Model {
 public:
  Model(const RunConfig& cfg, std::uint64_t init_seed) : cfg_(cfg), kind_(cfg.kind()) {
    cfg_.validate();
    Rng rng(init_seed);
    const int hid = cfg_.enc_units;
    const ScoreKind score = score_kind_from_string(cfg_.score);

    if (kind_ != ModelKind::kAudioOnly) {
      visual_ = make_visual_frontend(params_, "visual",
                                     visual_norm_from_string(cfg_.visual_norm), rng);
      video_enc_ = make_lstm_stack(params_, "video_enc", cfg_.visual_dim, hid, cfg_.enc_layers,
                                   rng);
    }
    const int audio_layers =
        kind_ == ModelKind::kAvAlign ? cfg_.enc_layers - 1 : cfg_.enc_layers;
    audio_enc_ = make_lstm_stack(params_, "audio_enc", kFeatureDim, hid, audio_layers, rng);
    if (kind_ == ModelKind::kAvAlign) {
      fusion_ = make_fusion_layer(params_, "fusion", hid, hid, hid, cfg_.attn_units, score,
                                  fusion_mix_from_string(cfg_.fusion_mix), rng);
    }

    const int n_memories = kind_ == ModelKind::kAvCat ? 2 : 1;
    const int summary_dim = 2 * cfg_.enc_layers * hid * (kind_ == ModelKind::kAvCat ? 2 : 1);
    decoder_ = make_decoder(params_, "decoder", Vocab::instance().size(), cfg_.char_emb,
                            cfg_.dec_units, cfg_.heads, n_memories, hid, cfg_.attn_units,
                            summary_dim, score, rng);
  }

  ParamStore<Real>& params() { return params_; }
  const RunConfig& config() const { return cfg_; }
  ModelKind kind() const { return kind_; }
  FeatureNorm& feature_norm() { return feat_norm_; }
  const FeatureNorm& feature_norm() const { return feat_norm_; }

  bool needs_video() const { return kind_ != ModelKind::kAudioOnly; }

  // Per-item memories for the decoder plus the batched summary.
  struct Encoded {
    std::vector<std::vector<Tensor<Real>>> memories;  // [item][stream]
    Tensor<Real> summary;                             // [B x summary_dim]
    std::vector<int> audio_lengths;
    std::vector<std::vector<std::vector<double>>> alignments;
  };

  Encoded encode(Tape<Real>* tape, const std::vector<ModelInput<Real>>& batch, bool training) {
    const int n = static_cast<int>(batch.size());
    if (n == 0) throw DataError("model: empty batch");
    Encoded enc;
    enc.memories.resize(n);

    std::vector<Tensor<Real>> audio_items;
    for (const auto& item : batch) {
      if (item.audio.rows() == 0) throw DataError("model: empty audio features");
      if (item.audio.cols() != kFeatureDim) {
        throw DimensionError("model: audio features " + item.audio.shape_str());
      }
      audio_items.push_back(item.audio);
      enc.audio_lengths.push_back(item.audio.rows());
    }
    PaddedBatch<Real> audio_batch = pad_batch(audio_items);

    // video path: embed every frame of every item in one CNN batch
    std::vector<Tensor<Real>> video_memories;
    EncoderOutput<Real> video_out;
    if (needs_video()) {
      std::vector<int> frame_counts;
      int total_frames = 0;
      for (const auto& item : batch) {
        if (item.frames.ndim() != 4 || item.frames.dim(0) == 0) {
          throw DataError("model: the AV variants need video frames for every utterance");
        }
        frame_counts.push_back(item.frames.dim(0));
        total_frames += item.frames.dim(0);
      }
      Tensor<Real> all({total_frames, kFrameSize, kFrameSize, kFrameChannels});
      std::size_t off = 0;
      for (const auto& item : batch) {
        std::copy_n(item.frames.data(), item.frames.numel(), all.data() + off);
        off += item.frames.numel();
      }
      Tensor<Real> emb = visual_->embed(tape, all, training);  // [N x 128]
      std::vector<Tensor<Real>> video_items;
      int row = 0;
      for (int b = 0; b < n; ++b) {
        video_items.push_back(slice_rows(tape, emb, row, row + frame_counts[b]));
        row += frame_counts[b];
      }
      video_out = video_enc_->encode(tape, pad_batch(video_items));
      for (int b = 0; b < n; ++b) {
        video_memories.push_back(video_out.item_memory(tape, b));
      }
    }

    switch (kind_) {
      case ModelKind::kAudioOnly: {
        EncoderOutput<Real> out = audio_enc_.encode(tape, audio_batch);
        for (int b = 0; b < n; ++b) enc.memories[b] = {out.item_memory(tape, b)};
        enc.summary = out.summary(tape);
        break;
      }
      case ModelKind::kAvAlign: {
        EncoderOutput<Real> lower = audio_enc_.encode(tape, audio_batch);
        FusionOutput<Real> fused = fusion_->fuse_encode(tape, lower.memory_steps,
                                                        audio_batch.lengths, video_memories);
        for (int b = 0; b < n; ++b) enc.memories[b] = {fused.item_memory(tape, b)};
        Tensor<Real> fused_summary =
            concat_cols(tape, fused.final_state.first, fused.final_state.second);
        enc.summary = concat_cols(tape, lower.summary(tape), fused_summary);
        enc.alignments = std::move(fused.alignments);
        break;
      }
      case ModelKind::kAvCat: {
        EncoderOutput<Real> audio_out = audio_enc_.encode(tape, audio_batch);
        for (int b = 0; b < n; ++b) {
          enc.memories[b] = {audio_out.item_memory(tape, b), video_memories[b]};
        }
        enc.summary = concat_cols(tape, audio_out.summary(tape), video_out.summary(tape));
        break;
      }
    }
    return enc;
  }

  ModelForward<Real> loss(Tape<Real>* tape, const std::vector<ModelInput<Real>>& batch,
                          bool training) {
    Encoded enc = encode(tape, batch, training);
    std::vector<UtteranceMemories<Real>> mems;
    std::vector<std::vector<int>> targets;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      mems.push_back(decoder_.prepare(tape, enc.memories[b]));
      targets.push_back(batch[b].target_ids);
    }
    ModelForward<Real> out;
    out.loss = decoder_.teacher_forced_loss(tape, mems, enc.summary, targets);
    out.alignments = std::move(enc.alignments);
    return out;
  }

  // Inference on one utterance; returns the transcription and, for
  // av-align, the alignment matrix.
  std::pair<std::string, std::vector<std::vector<double>>> transcribe(
      const ModelInput<Real>& item) {
    Encoded enc = encode(nullptr, {item}, false);
    UtteranceMemories<Real> mems = decoder_.prepare(nullptr, enc.memories[0]);
    const int max_len = default_max_decode_len(enc.audio_lengths[0]);
    std::vector<int> ids;
    if (cfg_.decode == "beam") {
      ids = decoder_.beam_decode(mems, enc.summary, max_len, cfg_.beam_width);
    } else {
      ids = decoder_.greedy_decode(mems, enc.summary, max_len);
    }
    std::vector<std::vector<double>> alignment;
    if (!enc.alignments.empty()) alignment = std::move(enc.alignments[0]);
    return {Vocab::instance().decode(ids), std::move(alignment)};
  }

  Decoder<Real>& decoder() { return decoder_; }
  LstmStack<Real>& audio_encoder() { return audio_enc_; }
  std::optional<FusionLayer<Real>>& fusion_layer() { return fusion_; }
  std::optional<VisualFrontend<Real>>& visual_frontend() { return visual_; }
  std::optional<LstmStack<Real>>& video_encoder() { return video_enc_; }

 private:
  RunConfig cfg_;
  ModelKind kind_;
  ParamStore<Real> params_;
  FeatureNorm feat_norm_;

  std::optional<VisualFrontend<Real>> visual_;
  std::optional<LstmStack<Real>> video_enc_;
  LstmStack<Real> audio_enc_;
  std::optional<FusionLayer<Real>> fusion_;
  Decoder<Real> decoder_;
};

}  // namespace ava
