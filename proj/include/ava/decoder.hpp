// include/ava/decoder.hpp

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

// Single-layer 256-unit LSTM character decoder. Four attention heads read
// each attended memory; the per-memory head contexts are projected to the
// decoder width, concatenated across memories, combined with the cell
// output, and projected to vocabulary logits. The initial state comes from
// the encoder summary through a learned linear map.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ava/attention.hpp"
#include "ava/lstm.hpp"
#include "ava/vocab.hpp"

namespace ava {

// All attended memories of one utterance, with projections precomputed.
template <typename Real>
using UtteranceMemories = std::vector<PreparedMemory<Real>>;

template <typename Real>
struct Decoder {
  Tensor<Real> embedding;  // [V x emb_dim]
  LstmWeights<Real> cell;  // emb_dim -> hidden
  std::vector<MultiHeadAttention<Real>> attn;  // one per attended memory
  Tensor<Real> w_out, b_out;   // [(hidden + n_mem*hidden) x V]
  Tensor<Real> w_init, b_init; // [summary_dim x 2*hidden]
  int hidden = 0;
  int n_memories = 0;

  int vocab_size() const { return embedding.rows(); }

  UtteranceMemories<Real> prepare(Tape<Real>* tape,
                                  const std::vector<Tensor<Real>>& memories) const {
    if (static_cast<int>(memories.size()) != n_memories) {
      throw DimensionError("decoder: expected " + std::to_string(n_memories) + " memories, got " +
                           std::to_string(memories.size()));
    }
    UtteranceMemories<Real> prep;
    for (int s = 0; s < n_memories; ++s) {
      if (memories[s].rows() == 0) throw DataError("decoder: empty memory");
      prep.push_back(attn[s].prepare(tape, memories[s]));
    }
    return prep;
  }

  // Initial (h, c) from the batched summary [B x summary_dim].
  std::pair<Tensor<Real>, Tensor<Real>> init_state(Tape<Real>* tape,
                                                   const Tensor<Real>& summary) const {
    Tensor<Real> proj = add_rowvec(tape, matmul(tape, summary, w_init), b_init);
    return {slice_cols(tape, proj, 0, hidden), slice_cols(tape, proj, hidden, 2 * hidden)};
  }

  // One decode step over a batch of utterances (each with its own memories).
  // Returns the [B x V] logits and advances (h, c) in place.
  Tensor<Real> step(Tape<Real>* tape, const std::vector<int>& prev_symbols, Tensor<Real>& h,
                    Tensor<Real>& c, const std::vector<UtteranceMemories<Real>>& memories) const {
    const int batch = static_cast<int>(prev_symbols.size());
    if (static_cast<int>(memories.size()) != batch) {
      throw DimensionError("decoder step: memories for every batch item required");
    }
    Tensor<Real> emb = embed_rows(tape, embedding, prev_symbols);
    std::tie(h, c) = lstm_cell(tape, emb, h, c, cell);

    std::vector<Tensor<Real>> ctx_rows;
    ctx_rows.reserve(batch);
    for (int b = 0; b < batch; ++b) {
      Tensor<Real> q = row(tape, h, b);
      Tensor<Real> item_ctx;
      for (int s = 0; s < n_memories; ++s) {
        auto [ctx, alphas] = attn[s].context(tape, q, memories[b][s]);
        item_ctx = s == 0 ? ctx : concat_cols(tape, item_ctx, ctx);
      }
      ctx_rows.push_back(item_ctx);
    }
    Tensor<Real> ctx = concat_rows(tape, ctx_rows);
    return add_rowvec(tape, matmul(tape, concat_cols(tape, h, ctx), w_out), b_out);
  }

  // Mean cross entropy over non-PAD positions, teacher forced. `targets`
  // holds the raw symbol ids per item (no specials); SOS/EOS are added here.
  Tensor<Real> teacher_forced_loss(Tape<Real>* tape,
                                   const std::vector<UtteranceMemories<Real>>& memories,
                                   const Tensor<Real>& summary,
                                   const std::vector<std::vector<int>>& targets) const {
    const int batch = static_cast<int>(targets.size());
    int max_len = 0;
    for (const auto& t : targets) {
      if (t.empty()) throw DataError("teacher_forced_loss: empty target");
      max_len = std::max(max_len, static_cast<int>(t.size()));
    }
    auto [h, c] = init_state(tape, summary);

    Tensor<Real> total;
    int count = 0;
    // inputs are SOS + target, outputs target + EOS (padded past each item)
    for (int t = 0; t <= max_len; ++t) {
      std::vector<int> prev(batch), want(batch);
      std::vector<Real> weight(batch);
      for (int b = 0; b < batch; ++b) {
        const auto& tgt = targets[b];
        const int len = static_cast<int>(tgt.size());
        prev[b] = t == 0 ? Vocab::kSos : (t - 1 < len ? tgt[t - 1] : Vocab::kPad);
        if (t < len) {
          want[b] = tgt[t];
          weight[b] = 1;
          ++count;
        } else if (t == len) {
          want[b] = Vocab::kEos;
          weight[b] = 1;
          ++count;
        } else {
          want[b] = Vocab::kPad;
          weight[b] = 0;
        }
      }
      Tensor<Real> logits = step(tape, prev, h, c, memories);
      Tensor<Real> ce = cross_entropy_sum(tape, logits, want, weight);
      total = t == 0 ? ce : add(tape, total, ce);
    }
    return scale(tape, total, Real(1) / static_cast<Real>(count));
  }

  // Greedy argmax decoding of a single utterance; deterministic.
  std::vector<int> greedy_decode(const UtteranceMemories<Real>& memories,
                                 const Tensor<Real>& summary, int max_len) const {
    auto [h, c] = init_state(nullptr, summary);
    std::vector<UtteranceMemories<Real>> mem = {memories};
    std::vector<int> out;
    int prev = Vocab::kSos;
    for (int t = 0; t < max_len; ++t) {
      Tensor<Real> logits = step(nullptr, {prev}, h, c, mem);
      int best = 0;
      for (int j = 1; j < logits.cols(); ++j) {
        if (logits.at(0, j) > logits.at(0, best)) best = j;
      }
      if (best == Vocab::kEos) break;
      out.push_back(best);
      prev = best;
    }
    return out;
  }

  // Beam search (width k, no length penalty); falls back to the best live
  // hypothesis when none finished.
  std::vector<int> beam_decode(const UtteranceMemories<Real>& memories,
                               const Tensor<Real>& summary, int max_len, int width) const {
    struct Hyp {
      std::vector<int> ids;
      double logp = 0.0;
      Tensor<Real> h, c;
      bool done = false;
    };
    Hyp start;
    std::tie(start.h, start.c) = init_state(nullptr, summary);
    std::vector<Hyp> beam = {start};
    std::vector<UtteranceMemories<Real>> mem = {memories};
    for (int t = 0; t < max_len; ++t) {
      std::vector<Hyp> cand;
      bool any_live = false;
      for (const Hyp& hyp : beam) {
        if (hyp.done) {
          cand.push_back(hyp);
          continue;
        }
        any_live = true;
        Hyp next = hyp;
        const int prev = hyp.ids.empty() ? Vocab::kSos : hyp.ids.back();
        Tensor<Real> logits = step(nullptr, {prev}, next.h, next.c, mem);
        Tensor<Real> logp = log_softmax_rows<Real>(nullptr, logits);
        for (int j = 0; j < logp.cols(); ++j) {
          Hyp child = next;
          child.logp += static_cast<double>(logp.at(0, j));
          if (j == Vocab::kEos) {
            child.done = true;
          } else {
            child.ids.push_back(j);
          }
          cand.push_back(std::move(child));
        }
      }
      if (!any_live) break;
      std::sort(cand.begin(), cand.end(),
                [](const Hyp& a, const Hyp& b) { return a.logp > b.logp; });
      if (static_cast<int>(cand.size()) > width) cand.resize(width);
      beam = std::move(cand);
    }
    const Hyp* best = nullptr;
    for (const Hyp& h : beam) {
      if (h.done && (!best || h.logp > best->logp)) best = &h;
    }
    if (!best) best = &beam.front();
    return best->ids;
  }
};

template <typename Real>
Decoder<Real> make_decoder(ParamStore<Real>& params, const std::string& name, int vocab,
                           int emb_dim, int hidden, int n_heads, int n_memories, int memory_dim,
                           int attn_dim, int summary_dim, ScoreKind score, Rng& rng) {
  Decoder<Real> d;
  d.hidden = hidden;
  d.n_memories = n_memories;
  d.embedding = params.create(name + "/embedding", {vocab, emb_dim});
  glorot_init(d.embedding, vocab, emb_dim, rng);
  d.cell = make_lstm_weights(params, name + "/cell", emb_dim, hidden, rng);
  for (int s = 0; s < n_memories; ++s) {
    d.attn.push_back(make_multihead_attention(params, name + "/attn" + std::to_string(s), n_heads,
                                              hidden, memory_dim, attn_dim, hidden, score, rng));
  }
  d.w_out = params.create(name + "/w_out", {hidden + n_memories * hidden, vocab});
  d.b_out = params.create(name + "/b_out", {vocab});
  glorot_init(d.w_out, hidden + n_memories * hidden, vocab, rng);
  d.w_init = params.create(name + "/w_init", {summary_dim, 2 * hidden});
  d.b_init = params.create(name + "/b_init", {2 * hidden});
  glorot_init(d.w_init, summary_dim, 2 * hidden, rng);
  return d;
}

// Default decode cap: twice the (audio) memory length plus slack.
inline int default_max_decode_len(int memory_len) { return 2 * memory_len + 10; }

}  // namespace ava
