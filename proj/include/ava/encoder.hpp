// include/ava/encoder.hpp

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

// Stacked unidirectional LSTM encoder over padded batches. Per item, the
// final state is taken at that item's true length (state freezing), and
// memory rows past the true length are zeroed. Initial states are zeros.

#include <utility>
#include <vector>

#include "ava/lstm.hpp"

namespace ava {

// A padded time-major batch: steps[t] is [B x dim], rows past an item's
// length are zero. mask(t) is the [B] column of step validity.
template <typename Real>
struct PaddedBatch {
  std::vector<Tensor<Real>> steps;
  std::vector<int> lengths;

  int batch_size() const { return steps.empty() ? 0 : steps[0].rows(); }
  int max_len() const { return static_cast<int>(steps.size()); }

  Tensor<Real> mask_col(int t) const {
    Tensor<Real> m({batch_size()});
    for (int b = 0; b < batch_size(); ++b) m.at(b) = t < lengths[b] ? Real(1) : Real(0);
    return m;
  }
};

// Build a padded time-major batch from per-item [T_b x dim] matrices.
template <typename Real>
PaddedBatch<Real> pad_batch(const std::vector<Tensor<Real>>& items) {
  if (items.empty()) throw DataError("pad_batch: empty batch");
  PaddedBatch<Real> out;
  const int dim = items[0].cols();
  int max_len = 0;
  for (const auto& it : items) {
    if (it.rows() == 0) throw DataError("pad_batch: zero-length item");
    if (it.cols() != dim) throw DimensionError("pad_batch: inconsistent feature dims");
    out.lengths.push_back(it.rows());
    max_len = std::max(max_len, it.rows());
  }
  const int batch = static_cast<int>(items.size());
  for (int t = 0; t < max_len; ++t) {
    Tensor<Real> step({batch, dim});
    for (int b = 0; b < batch; ++b) {
      if (t < items[b].rows()) {
        std::copy_n(items[b].data() + static_cast<std::size_t>(t) * dim, dim,
                    step.data() + static_cast<std::size_t>(b) * dim);
      }
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

// Per-modality encoder output: the memory (top-layer output sequence) and
// the summary (final (h,c) of every layer).
template <typename Real>
struct EncoderOutput {
  std::vector<Tensor<Real>> memory_steps;                       // per t: [B x H], masked
  std::vector<std::pair<Tensor<Real>, Tensor<Real>>> finals;    // per layer (h, c)
  std::vector<int> lengths;
  int hidden = 0;

  // One item's memory as a [len x H] matrix.
  Tensor<Real> item_memory(Tape<Real>* tape, int item) const {
    return stack_item_rows(tape, memory_steps, item, lengths[item]);
  }

  // Batched summary [B x 2*L*H]: h then c for each layer, bottom to top.
  Tensor<Real> summary(Tape<Real>* tape) const {
    Tensor<Real> out;
    bool first = true;
    for (const auto& [h, c] : finals) {
      out = first ? concat_cols(tape, h, c) : concat_cols(tape, out, concat_cols(tape, h, c));
      first = false;
    }
    return out;
  }
};

template <typename Real>
struct LstmStack {
  std::vector<LstmWeights<Real>> layers;

  int hidden() const { return layers.empty() ? 0 : layers.back().hidden; }

  EncoderOutput<Real> encode(Tape<Real>* tape, const PaddedBatch<Real>& input) const {
    if (input.steps.empty()) throw DataError("encode: empty batch");
    for (int len : input.lengths) {
      if (len <= 0) throw DataError("encode: zero-length item");
    }
    const int batch = input.batch_size();
    const int t_max = input.max_len();

    EncoderOutput<Real> out;
    out.lengths = input.lengths;
    out.hidden = hidden();

    std::vector<Tensor<Real>> cur = input.steps;
    std::vector<Tensor<Real>> masks;
    masks.reserve(t_max);
    for (int t = 0; t < t_max; ++t) masks.push_back(input.mask_col(t));

    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& wts = layers[l];
      Tensor<Real> h({batch, wts.hidden});
      Tensor<Real> c({batch, wts.hidden});
      std::vector<Tensor<Real>> next;
      next.reserve(t_max);
      for (int t = 0; t < t_max; ++t) {
        auto [h_new, c_new] = lstm_cell(tape, cur[t], h, c, wts);
        // freeze state past each item's true length
        Tensor<Real> m = masks[t];
        Tensor<Real> inv({batch});
        for (int b = 0; b < batch; ++b) inv.at(b) = Real(1) - m.at(b);
        h = add(tape, mul_colvec(tape, h_new, m), mul_colvec(tape, h, inv));
        c = add(tape, mul_colvec(tape, c_new, m), mul_colvec(tape, c, inv));
        next.push_back(h);
      }
      cur = std::move(next);
      out.finals.emplace_back(h, c);
    }

    out.memory_steps.reserve(t_max);
    for (int t = 0; t < t_max; ++t) {
      out.memory_steps.push_back(mul_colvec(tape, cur[t], masks[t]));
    }
    return out;
  }
};

template <typename Real>
LstmStack<Real> make_lstm_stack(ParamStore<Real>& params, const std::string& name, int input_dim,
                                int hidden, int n_layers, Rng& rng) {
  LstmStack<Real> stack;
  for (int l = 0; l < n_layers; ++l) {
    stack.layers.push_back(make_lstm_weights(params, name + "/l" + std::to_string(l),
                                             l == 0 ? input_dim : hidden, hidden, rng));
  }
  return stack;
}

}  // namespace ava
