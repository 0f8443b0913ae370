// include/ava/ops.hpp

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

// Differentiable tensor ops. Each op computes its forward result and, when a
// tape is supplied and an input requires grad, records the adjoint closure.
// Elementwise loops parallelize only past a size threshold; reductions and
// per-element accumulation keep a fixed order so results do not depend on
// the thread count.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ava/kernels.hpp"
#include "ava/tensor.hpp"

namespace ava {

namespace detail {

template <typename Real>
inline bool want_grad(Tape<Real>* tape, const Tensor<Real>& t) {
  return tape != nullptr && t.requires_grad();
}

template <typename Real>
inline Tensor<Real> make_out(std::vector<int> shape, bool requires_grad) {
  return Tensor<Real>(std::move(shape), requires_grad);
}

inline void require_matrix(int ndim, const char* op) {
  if (ndim != 2) throw DimensionError(std::string(op) + " expects a matrix input");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// matmul

template <typename Real>
Tensor<Real> matmul(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
  detail::require_matrix(a.ndim(), "matmul");
  detail::require_matrix(b.ndim(), "matmul");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  const bool rg = detail::want_grad(tape, a) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>({m, n}, rg);
  kernels::gemm_nn(a.data(), b.data(), out.data(), m, k, n);
  if (rg) {
    tape->record([a, b, out, m, k, n]() {
      // dA = dC * B^T, dB = A^T * dC; both kernels read the operands in
      // place, no transposed copies.
      if (a.requires_grad()) {
        kernels::gemm_nt(out.grad_data(), b.data(), const_cast<Real*>(a.grad_data()), m, n, k,
                         /*acc=*/true);
      }
      if (b.requires_grad()) {
        kernels::gemm_tn(a.data(), out.grad_data(), const_cast<Real*>(b.grad_data()), m, k, n,
                         /*acc=*/true);
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// elementwise arithmetic

template <typename Real>
Tensor<Real> add(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  const bool rg = detail::want_grad(tape, a) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>(a.shape(), rg);
  const std::size_t n = out.numel();
  const Real* pa = a.data();
  const Real* pb = b.data();
  Real* po = out.data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  if (rg) {
    tape->record([a, b, out, n]() {
      const Real* g = out.grad_data();
      if (a.requires_grad()) {
        Real* ga = const_cast<Real*>(a.grad_data());
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        Real* gb = const_cast<Real*>(b.grad_data());
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> sub(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  const bool rg = detail::want_grad(tape, a) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>(a.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
  if (rg) {
    tape->record([a, b, out, n]() {
      const Real* g = out.grad_data();
      if (a.requires_grad()) {
        Real* ga = const_cast<Real*>(a.grad_data());
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        Real* gb = const_cast<Real*>(b.grad_data());
        for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> mul(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  const bool rg = detail::want_grad(tape, a) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>(a.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (rg) {
    tape->record([a, b, out, n]() {
      const Real* g = out.grad_data();
      if (a.requires_grad()) {
        Real* ga = const_cast<Real*>(a.grad_data());
        const Real* pb = b.data();
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * pb[i];
      }
      if (b.requires_grad()) {
        Real* gb = const_cast<Real*>(b.grad_data());
        const Real* pa = a.data();
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * pa[i];
      }
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> scale(Tape<Real>* tape, const Tensor<Real>& a, Real s) {
  const bool rg = detail::want_grad(tape, a);
  Tensor<Real> out = detail::make_out<Real>(a.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * s;
  if (rg) {
    tape->record([a, out, s, n]() {
      Real* ga = const_cast<Real*>(a.grad_data());
      const Real* g = out.grad_data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * s;
    });
  }
  return out;
}

// x[m x n] + v broadcast across rows (bias add).
template <typename Real>
Tensor<Real> add_rowvec(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& v) {
  detail::require_matrix(x.ndim(), "add_rowvec");
  const int m = x.rows(), n = x.cols();
  if (static_cast<int>(v.numel()) != n) {
    throw DimensionError("add_rowvec: vector " + v.shape_str() + " vs matrix " + x.shape_str());
  }
  const bool rg = detail::want_grad(tape, x) || detail::want_grad(tape, v);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = x.at(i, j) + v.at(j);
  if (rg) {
    tape->record([x, v, out, m, n]() {
      const Real* g = out.grad_data();
      if (x.requires_grad()) {
        Real* gx = const_cast<Real*>(x.grad_data());
        const std::size_t total = static_cast<std::size_t>(m) * n;
        for (std::size_t i = 0; i < total; ++i) gx[i] += g[i];
      }
      if (v.requires_grad()) {
        Real* gv = const_cast<Real*>(v.grad_data());
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gv[j] += g[static_cast<std::size_t>(i) * n + j];
      }
    });
  }
  return out;
}

// x[m x n] scaled per row by v[m] (used for sequence masks).
template <typename Real>
Tensor<Real> mul_colvec(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& v) {
  detail::require_matrix(x.ndim(), "mul_colvec");
  const int m = x.rows(), n = x.cols();
  if (static_cast<int>(v.numel()) != m) {
    throw DimensionError("mul_colvec: vector " + v.shape_str() + " vs matrix " + x.shape_str());
  }
  const bool rg = detail::want_grad(tape, x) || detail::want_grad(tape, v);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = x.at(i, j) * v.at(i);
  if (rg) {
    tape->record([x, v, out, m, n]() {
      const Real* g = out.grad_data();
      if (x.requires_grad()) {
        Real* gx = const_cast<Real*>(x.grad_data());
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j)
            gx[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(i) * n + j] * v.at(i);
      }
      if (v.requires_grad()) {
        Real* gv = const_cast<Real*>(v.grad_data());
        for (int i = 0; i < m; ++i) {
          Real acc = 0;
          for (int j = 0; j < n; ++j) acc += g[static_cast<std::size_t>(i) * n + j] * x.at(i, j);
          gv[i] += acc;
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// nonlinearities

template <typename Real>
Tensor<Real> sigmoid(Tape<Real>* tape, const Tensor<Real>& x) {
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) {
    const Real v = x.data()[i];
    out.data()[i] = v >= 0 ? Real(1) / (Real(1) + std::exp(-v))
                           : Real(1) - Real(1) / (Real(1) + std::exp(v));
  }
  if (rg) {
    tape->record([x, out, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const Real* y = out.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * y[i] * (Real(1) - y[i]);
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> tanh_op(Tape<Real>* tape, const Tensor<Real>& x) {
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::tanh(x.data()[i]);
  if (rg) {
    tape->record([x, out, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const Real* y = out.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * (Real(1) - y[i] * y[i]);
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> relu(Tape<Real>* tape, const Tensor<Real>& x) {
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = x.data()[i] > 0 ? x.data()[i] : Real(0);
  if (rg) {
    tape->record([x, out, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const Real* v = x.data();
      for (std::size_t i = 0; i < n; ++i)
        if (v[i] > 0) gx[i] += g[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// softmax family

// Row softmax with max subtraction. An optional 0/1 mask (same shape)
// restricts each row's distribution to its valid entries.
template <typename Real>
Tensor<Real> softmax_rows(Tape<Real>* tape, const Tensor<Real>& x,
                          const std::vector<unsigned char>* mask = nullptr) {
  detail::require_matrix(x.ndim(), "softmax_rows");
  const int m = x.rows(), n = x.cols();
  if (mask && mask->size() != x.numel()) {
    throw DimensionError("softmax_rows: mask size mismatch");
  }
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  for (int i = 0; i < m; ++i) {
    const Real* row = x.data() + static_cast<std::size_t>(i) * n;
    Real* orow = out.data() + static_cast<std::size_t>(i) * n;
    const unsigned char* mrow = mask ? mask->data() + static_cast<std::size_t>(i) * n : nullptr;
    Real mx = -std::numeric_limits<Real>::infinity();
    for (int j = 0; j < n; ++j) {
      if (mrow && !mrow[j]) continue;
      if (std::isnan(static_cast<double>(row[j]))) {
        throw NumericError("softmax: NaN input at row " + std::to_string(i));
      }
      mx = std::max(mx, row[j]);
    }
    if (mx == -std::numeric_limits<Real>::infinity()) {
      throw DataError("softmax: row " + std::to_string(i) + " is fully masked");
    }
    Real denom = 0;
    for (int j = 0; j < n; ++j) {
      if (mrow && !mrow[j]) {
        orow[j] = 0;
        continue;
      }
      orow[j] = std::exp(row[j] - mx);
      denom += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= denom;
  }
  if (rg) {
    tape->record([x, out, m, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const Real* y = out.data();
      for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        Real dot = 0;
        for (int j = 0; j < n; ++j) dot += g[off + j] * y[off + j];
        for (int j = 0; j < n; ++j) gx[off + j] += y[off + j] * (g[off + j] - dot);
      }
    });
  }
  return out;
}

// Row log-softmax, stable via logsumexp.
template <typename Real>
Tensor<Real> log_softmax_rows(Tape<Real>* tape, const Tensor<Real>& x) {
  detail::require_matrix(x.ndim(), "log_softmax_rows");
  const int m = x.rows(), n = x.cols();
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  for (int i = 0; i < m; ++i) {
    const Real* row = x.data() + static_cast<std::size_t>(i) * n;
    Real* orow = out.data() + static_cast<std::size_t>(i) * n;
    Real mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    Real denom = 0;
    for (int j = 0; j < n; ++j) denom += std::exp(row[j] - mx);
    const Real lse = mx + std::log(denom);
    for (int j = 0; j < n; ++j) orow[j] = row[j] - lse;
  }
  if (rg) {
    tape->record([x, out, m, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const Real* y = out.data();
      for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        Real gsum = 0;
        for (int j = 0; j < n; ++j) gsum += g[off + j];
        for (int j = 0; j < n; ++j) gx[off + j] += g[off + j] - std::exp(y[off + j]) * gsum;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// shape surgery

template <typename Real>
Tensor<Real> concat_cols(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
  detail::require_matrix(a.ndim(), "concat_cols");
  detail::require_matrix(b.ndim(), "concat_cols");
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  const int m = a.rows(), na = a.cols(), nb = b.cols();
  const bool rg = detail::want_grad(tape, a) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>({m, na + nb}, rg);
  for (int i = 0; i < m; ++i) {
    std::copy_n(a.data() + static_cast<std::size_t>(i) * na, na,
                out.data() + static_cast<std::size_t>(i) * (na + nb));
    std::copy_n(b.data() + static_cast<std::size_t>(i) * nb, nb,
                out.data() + static_cast<std::size_t>(i) * (na + nb) + na);
  }
  if (rg) {
    tape->record([a, b, out, m, na, nb]() {
      const Real* g = out.grad_data();
      for (int i = 0; i < m; ++i) {
        const Real* grow = g + static_cast<std::size_t>(i) * (na + nb);
        if (a.requires_grad()) {
          Real* ga = const_cast<Real*>(a.grad_data()) + static_cast<std::size_t>(i) * na;
          for (int j = 0; j < na; ++j) ga[j] += grow[j];
        }
        if (b.requires_grad()) {
          Real* gb = const_cast<Real*>(b.grad_data()) + static_cast<std::size_t>(i) * nb;
          for (int j = 0; j < nb; ++j) gb[j] += grow[na + j];
        }
      }
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> concat_rows(Tape<Real>* tape, const std::vector<Tensor<Real>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const int n = parts[0].cols();
  int m = 0;
  bool rg = false;
  for (const auto& p : parts) {
    detail::require_matrix(p.ndim(), "concat_rows");
    if (p.cols() != n) throw DimensionError("concat_rows: column mismatch");
    m += p.rows();
    rg = rg || detail::want_grad(tape, p);
  }
  Tensor<Real> out = detail::make_out<Real>({m, n}, rg);
  int r = 0;
  for (const auto& p : parts) {
    std::copy_n(p.data(), p.numel(), out.data() + static_cast<std::size_t>(r) * n);
    r += p.rows();
  }
  if (rg) {
    tape->record([parts, out, n]() {
      const Real* g = out.grad_data();
      int r2 = 0;
      for (const auto& p : parts) {
        if (p.requires_grad()) {
          Real* gp = const_cast<Real*>(p.grad_data());
          const std::size_t cnt = p.numel();
          const Real* src = g + static_cast<std::size_t>(r2) * n;
          for (std::size_t i = 0; i < cnt; ++i) gp[i] += src[i];
        }
        r2 += p.rows();
      }
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> slice_cols(Tape<Real>* tape, const Tensor<Real>& x, int c0, int c1) {
  detail::require_matrix(x.ndim(), "slice_cols");
  const int m = x.rows(), n = x.cols();
  if (c0 < 0 || c1 > n || c0 >= c1) throw DimensionError("slice_cols: bad range");
  const int w = c1 - c0;
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>({m, w}, rg);
  for (int i = 0; i < m; ++i)
    std::copy_n(x.data() + static_cast<std::size_t>(i) * n + c0, w,
                out.data() + static_cast<std::size_t>(i) * w);
  if (rg) {
    tape->record([x, out, m, n, c0, w]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
          gx[static_cast<std::size_t>(i) * n + c0 + j] += g[static_cast<std::size_t>(i) * w + j];
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> slice_rows(Tape<Real>* tape, const Tensor<Real>& x, int r0, int r1) {
  detail::require_matrix(x.ndim(), "slice_rows");
  const int m = x.rows(), n = x.cols();
  if (r0 < 0 || r1 > m || r0 >= r1) throw DimensionError("slice_rows: bad range");
  const int h = r1 - r0;
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>({h, n}, rg);
  std::copy_n(x.data() + static_cast<std::size_t>(r0) * n, static_cast<std::size_t>(h) * n,
              out.data());
  if (rg) {
    tape->record([x, out, r0, h, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real* g = out.grad_data();
      const std::size_t cnt = static_cast<std::size_t>(h) * n;
      for (std::size_t i = 0; i < cnt; ++i) gx[static_cast<std::size_t>(r0) * n + i] += g[i];
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> row(Tape<Real>* tape, const Tensor<Real>& x, int i) {
  return slice_rows(tape, x, i, i + 1);
}

// Collect row `item` of each per-step matrix into a [len x n] matrix
// (time-major step list -> one item's sequence).
template <typename Real>
Tensor<Real> stack_item_rows(Tape<Real>* tape, const std::vector<Tensor<Real>>& steps, int item,
                             int len) {
  if (len <= 0 || len > static_cast<int>(steps.size())) {
    throw DimensionError("stack_item_rows: bad length " + std::to_string(len));
  }
  const int n = steps[0].cols();
  bool rg = false;
  for (int t = 0; t < len; ++t) rg = rg || detail::want_grad(tape, steps[t]);
  Tensor<Real> out = detail::make_out<Real>({len, n}, rg);
  for (int t = 0; t < len; ++t) {
    std::copy_n(steps[t].data() + static_cast<std::size_t>(item) * n, n,
                out.data() + static_cast<std::size_t>(t) * n);
  }
  if (rg) {
    std::vector<Tensor<Real>> held(steps.begin(), steps.begin() + len);
    tape->record([held, out, item, n, len]() {
      const Real* g = out.grad_data();
      for (int t = 0; t < len; ++t) {
        if (!held[t].requires_grad()) continue;
        Real* gs = const_cast<Real*>(held[t].grad_data()) + static_cast<std::size_t>(item) * n;
        for (int j = 0; j < n; ++j) gs[j] += g[static_cast<std::size_t>(t) * n + j];
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// reductions

template <typename Real>
Tensor<Real> sum_all(Tape<Real>* tape, const Tensor<Real>& x) {
  const bool rg = detail::want_grad(tape, x);
  Tensor<Real> out = detail::make_out<Real>({1, 1}, rg);
  Real acc = 0;
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) acc += x.data()[i];
  out.data()[0] = acc;
  if (rg) {
    tape->record([x, out, n]() {
      Real* gx = const_cast<Real*>(x.grad_data());
      const Real g = out.grad_data()[0];
      for (std::size_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

template <typename Real>
Tensor<Real> mean_all(Tape<Real>* tape, const Tensor<Real>& x) {
  return scale(tape, sum_all(tape, x), Real(1) / static_cast<Real>(x.numel()));
}

// ---------------------------------------------------------------------------
// embedding lookup

template <typename Real>
Tensor<Real> embed_rows(Tape<Real>* tape, const Tensor<Real>& table, const std::vector<int>& ids) {
  detail::require_matrix(table.ndim(), "embed_rows");
  const int v = table.rows(), d = table.cols();
  for (int id : ids) {
    if (id < 0 || id >= v) throw VocabError("symbol index " + std::to_string(id) + " out of range");
  }
  const bool rg = detail::want_grad(tape, table);
  Tensor<Real> out = detail::make_out<Real>({static_cast<int>(ids.size()), d}, rg);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(table.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  if (rg) {
    tape->record([table, out, ids, d]() {
      Real* gt = const_cast<Real*>(table.grad_data());
      const Real* g = out.grad_data();
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j) gt[static_cast<std::size_t>(ids[i]) * d + j] += g[i * d + j];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// cross entropy

// Sum over rows with weight[i] != 0 of -weight[i] * log softmax(logits[i])[target[i]].
// Weights let the caller mask PAD positions; divide by the mask count outside.
template <typename Real>
Tensor<Real> cross_entropy_sum(Tape<Real>* tape, const Tensor<Real>& logits,
                               const std::vector<int>& targets,
                               const std::vector<Real>& weights) {
  detail::require_matrix(logits.ndim(), "cross_entropy_sum");
  const int m = logits.rows(), n = logits.cols();
  if (static_cast<int>(targets.size()) != m || static_cast<int>(weights.size()) != m) {
    throw DimensionError("cross_entropy_sum: targets/weights length mismatch");
  }
  Tensor<Real> logp = log_softmax_rows(tape, logits);
  const bool rg = detail::want_grad(tape, logp);
  Tensor<Real> out = detail::make_out<Real>({1, 1}, rg);
  Real acc = 0;
  for (int i = 0; i < m; ++i) {
    const int t = targets[i];
    if (t < 0 || t >= n) throw VocabError("target index " + std::to_string(t) + " out of range");
    acc -= weights[i] * logp.at(i, t);
  }
  out.data()[0] = acc;
  if (rg) {
    tape->record([logp, out, targets, weights, n]() {
      Real* gl = const_cast<Real*>(logp.grad_data());
      const Real g = out.grad_data()[0];
      for (std::size_t i = 0; i < targets.size(); ++i) {
        gl[i * n + targets[i]] -= g * weights[i];
      }
    });
  }
  return out;
}

}  // namespace ava
