// include/ava/attention.hpp

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

// Content attention over a memory of value rows:
//   alpha_i = softmax_j score(value_j, query_i)
//   c_i     = sum_j alpha_ij value_j
// The default score is additive, w^T tanh(Wq q + Wv v); a scaled dot-product
// score is available behind the config switch.

#include <utility>
#include <vector>

#include "ava/ops.hpp"
#include "ava/optim.hpp"

namespace ava {

enum class ScoreKind { kAdditive, kDot };

inline ScoreKind score_kind_from_string(const std::string& s) {
  if (s == "additive") return ScoreKind::kAdditive;
  if (s == "dot") return ScoreKind::kDot;
  throw ConfigError("unknown attention score kind: " + s);
}

template <typename Real>
struct Attention {
  Tensor<Real> wq;  // [query_dim x attn_dim]
  Tensor<Real> wv;  // [value_dim x attn_dim]
  Tensor<Real> w;   // [attn_dim x 1], additive score vector
  ScoreKind kind = ScoreKind::kAdditive;
  int attn_dim = 0;

  // Memory projection, computed once per utterance.
  Tensor<Real> project(Tape<Real>* tape, const Tensor<Real>& memory) const {
    return matmul(tape, memory, wv);
  }

  // Unnormalized scores of one query against every memory row: [1 x T].
  Tensor<Real> scores(Tape<Real>* tape, const Tensor<Real>& query,
                      const Tensor<Real>& projected) const {
    Tensor<Real> qp = matmul(tape, query, wq);  // [1 x attn]
    if (kind == ScoreKind::kAdditive) {
      Tensor<Real> s = tanh_op(tape, add_rowvec(tape, projected, qp.view({attn_dim})));
      return matmul(tape, s, w).view({1, projected.rows()});
    }
    // scaled dot product between projected query and projected values
    Tensor<Real> e = matmul(tape, projected, qp.view({attn_dim, 1}));
    return scale(tape, e.view({1, projected.rows()}),
                 static_cast<Real>(1.0 / std::sqrt(static_cast<double>(attn_dim))));
  }

  // (context [1 x value_dim], alpha [1 x T]); mask (when present) marks the
  // memory rows the distribution may use.
  std::pair<Tensor<Real>, Tensor<Real>> attend(
      Tape<Real>* tape, const Tensor<Real>& query, const Tensor<Real>& memory,
      const Tensor<Real>& projected, const std::vector<unsigned char>* mask = nullptr) const {
    if (memory.rows() == 0) throw DataError("attend: empty memory");
    Tensor<Real> e = scores(tape, query, projected);
    Tensor<Real> alpha = softmax_rows(tape, e, mask);
    Tensor<Real> context = matmul(tape, alpha, memory);
    return {context, alpha};
  }
};

template <typename Real>
Attention<Real> make_attention(ParamStore<Real>& params, const std::string& name, int query_dim,
                               int value_dim, int attn_dim, ScoreKind kind, Rng& rng) {
  Attention<Real> a;
  a.kind = kind;
  a.attn_dim = attn_dim;
  a.wq = params.create(name + "/wq", {query_dim, attn_dim});
  a.wv = params.create(name + "/wv", {value_dim, attn_dim});
  a.w = params.create(name + "/w", {attn_dim, 1});
  glorot_init(a.wq, query_dim, attn_dim, rng);
  glorot_init(a.wv, value_dim, attn_dim, rng);
  glorot_init(a.w, attn_dim, 1, rng);
  return a;
}

// One utterance's memory with its per-head projections precomputed.
template <typename Real>
struct PreparedMemory {
  Tensor<Real> memory;                   // [T x value_dim]
  std::vector<Tensor<Real>> head_proj;   // per head [T x attn_dim]
};

// Several independent attention heads over one memory; the concatenated head
// contexts are projected back to out_dim.
template <typename Real>
struct MultiHeadAttention {
  std::vector<Attention<Real>> heads;
  Tensor<Real> w_proj;  // [n_heads*value_dim x out_dim]
  Tensor<Real> b_proj;  // [out_dim]

  PreparedMemory<Real> prepare(Tape<Real>* tape, const Tensor<Real>& memory) const {
    PreparedMemory<Real> p;
    p.memory = memory;
    p.head_proj.reserve(heads.size());
    for (const auto& h : heads) p.head_proj.push_back(h.project(tape, memory));
    return p;
  }

  // (projected context [1 x out_dim], per-head alphas [1 x T])
  std::pair<Tensor<Real>, std::vector<Tensor<Real>>> context(
      Tape<Real>* tape, const Tensor<Real>& query, const PreparedMemory<Real>& prep) const {
    std::vector<Tensor<Real>> alphas;
    Tensor<Real> cat;
    for (std::size_t h = 0; h < heads.size(); ++h) {
      auto [ctx, alpha] = heads[h].attend(tape, query, prep.memory, prep.head_proj[h]);
      alphas.push_back(alpha);
      cat = h == 0 ? ctx : concat_cols(tape, cat, ctx);
    }
    Tensor<Real> out = add_rowvec(tape, matmul(tape, cat, w_proj), b_proj);
    return {out, alphas};
  }
};

template <typename Real>
MultiHeadAttention<Real> make_multihead_attention(ParamStore<Real>& params,
                                                  const std::string& name, int n_heads,
                                                  int query_dim, int value_dim, int attn_dim,
                                                  int out_dim, ScoreKind kind, Rng& rng) {
  MultiHeadAttention<Real> m;
  for (int h = 0; h < n_heads; ++h) {
    m.heads.push_back(make_attention(params, name + "/head" + std::to_string(h), query_dim,
                                     value_dim, attn_dim, kind, rng));
  }
  m.w_proj = params.create(name + "/w_proj", {n_heads * value_dim, out_dim});
  m.b_proj = params.create(name + "/b_proj", {out_dim});
  glorot_init(m.w_proj, n_heads * value_dim, out_dim, rng);
  return m;
}

}  // namespace ava
