// include/ava/lstm.hpp

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

#include <utility>

#include "ava/ops.hpp"
#include "ava/optim.hpp"

namespace ava {

// One LSTM layer's weights: a single [in+hidden, 4*hidden] matrix producing
// the gate pre-activations for [x ; h_prev], gate order [i, f, g, o].
template <typename Real>
struct LstmWeights {
  Tensor<Real> w;  // [(input_dim + hidden) x 4*hidden]
  Tensor<Real> b;  // [4*hidden]
  int input_dim = 0;
  int hidden = 0;
};

template <typename Real>
LstmWeights<Real> make_lstm_weights(ParamStore<Real>& params, const std::string& name,
                                    int input_dim, int hidden, Rng& rng,
                                    double forget_bias = 1.0) {
  LstmWeights<Real> lw;
  lw.input_dim = input_dim;
  lw.hidden = hidden;
  lw.w = params.create(name + "/w", {input_dim + hidden, 4 * hidden});
  lw.b = params.create(name + "/b", {4 * hidden});
  glorot_init(lw.w, input_dim + hidden, 4 * hidden, rng);
  for (int j = hidden; j < 2 * hidden; ++j) lw.b.at(j) = static_cast<Real>(forget_bias);
  return lw;
}

// Standard LSTM cell:
//   i,f,o = sigmoid gates, g = tanh candidate
//   c' = f (.) c + i (.) g
//   h' = o (.) tanh(c')
// x [B x input_dim], h/c [B x hidden]; composed from primitive ops so the
// adjoints come from the tape.
template <typename Real>
std::pair<Tensor<Real>, Tensor<Real>> lstm_cell(Tape<Real>* tape, const Tensor<Real>& x,
                                                const Tensor<Real>& h_prev,
                                                const Tensor<Real>& c_prev,
                                                const LstmWeights<Real>& wts) {
  const int hid = wts.hidden;
  if (x.cols() != wts.input_dim || h_prev.cols() != hid || c_prev.cols() != hid) {
    throw DimensionError("lstm_cell: x " + x.shape_str() + ", h " + h_prev.shape_str() +
                         ", weights expect input " + std::to_string(wts.input_dim) + ", hidden " +
                         std::to_string(hid));
  }
  Tensor<Real> z = add_rowvec(tape, matmul(tape, concat_cols(tape, x, h_prev), wts.w), wts.b);
  Tensor<Real> i = sigmoid(tape, slice_cols(tape, z, 0, hid));
  Tensor<Real> f = sigmoid(tape, slice_cols(tape, z, hid, 2 * hid));
  Tensor<Real> g = tanh_op(tape, slice_cols(tape, z, 2 * hid, 3 * hid));
  Tensor<Real> o = sigmoid(tape, slice_cols(tape, z, 3 * hid, 4 * hid));
  Tensor<Real> c = add(tape, mul(tape, f, c_prev), mul(tape, i, g));
  Tensor<Real> h = mul(tape, o, tanh_op(tape, c));
  return {h, c};
}

}  // namespace ava
