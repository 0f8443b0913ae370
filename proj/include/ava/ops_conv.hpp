// include/ava/ops_conv.hpp

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

// Image-shaped ops: 2-d convolution (cross-correlation convention, NHWC
// layout) plus the channel-wise bias and normalization used by the visual
// front-end.

#include "ava/ops.hpp"

namespace ava {

// x [n,h,w,c_in] (or [h,w,c_in] for a single image), kernel [kh,kw,c_in,c_out].
template <typename Real>
Tensor<Real> conv2d(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& kernel, int stride,
                    int pad) {
  Tensor<Real> x4 = x;
  bool squeeze = false;
  if (x.ndim() == 3) {
    x4 = x.view({1, x.dim(0), x.dim(1), x.dim(2)});
    squeeze = true;
  }
  if (x4.ndim() != 4 || kernel.ndim() != 4) {
    throw DimensionError("conv2d: input " + x.shape_str() + ", kernel " + kernel.shape_str());
  }
  kernels::Conv2dShape s{x4.dim(0), x4.dim(1), x4.dim(2), x4.dim(3),
                         kernel.dim(0), kernel.dim(1), kernel.dim(3), stride, pad};
  if (kernel.dim(2) != s.c_in) {
    throw DimensionError("conv2d: channel mismatch, input " + x.shape_str() + " vs kernel " +
                         kernel.shape_str());
  }
  if (s.kh > s.h + 2 * pad || s.kw > s.w + 2 * pad) {
    throw DimensionError("conv2d: kernel " + kernel.shape_str() + " larger than padded input " +
                         x.shape_str());
  }
  if (stride < 1) throw DimensionError("conv2d: stride must be positive");
  const int oh = s.out_h(), ow = s.out_w();
  const bool rg = detail::want_grad(tape, x4) || detail::want_grad(tape, kernel);
  Tensor<Real> out = detail::make_out<Real>({s.n, oh, ow, s.c_out}, rg);
  kernels::conv2d_forward(x4.data(), kernel.data(), out.data(), s);
  if (rg) {
    tape->record([x4, kernel, out, s]() {
      if (x4.requires_grad()) {
        std::vector<Real> dx(x4.numel());
        kernels::conv2d_backward_input(out.grad_data(), kernel.data(), dx.data(), s);
        Real* gx = const_cast<Real*>(x4.grad_data());
        for (std::size_t i = 0; i < dx.size(); ++i) gx[i] += dx[i];
      }
      if (kernel.requires_grad()) {
        std::vector<Real> dk(kernel.numel());
        kernels::conv2d_backward_kernel(x4.data(), out.grad_data(), dk.data(), s);
        Real* gk = const_cast<Real*>(kernel.grad_data());
        for (std::size_t i = 0; i < dk.size(); ++i) gk[i] += dk[i];
      }
    });
  }
  return squeeze ? out.view({oh, ow, s.c_out}) : out;
}

// x [n,h,w,c] + b[c] broadcast over every pixel.
template <typename Real>
Tensor<Real> add_chanvec(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& b) {
  if (x.ndim() != 4 && x.ndim() != 3) throw DimensionError("add_chanvec: expects image input");
  const int c = x.dim(x.ndim() - 1);
  if (static_cast<int>(b.numel()) != c) {
    throw DimensionError("add_chanvec: bias " + b.shape_str() + " vs input " + x.shape_str());
  }
  const bool rg = detail::want_grad(tape, x) || detail::want_grad(tape, b);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  const std::size_t pixels = x.numel() / c;
  for (std::size_t p = 0; p < pixels; ++p)
    for (int j = 0; j < c; ++j) out.data()[p * c + j] = x.data()[p * c + j] + b.at(j);
  if (rg) {
    tape->record([x, b, out, pixels, c]() {
      const Real* g = out.grad_data();
      if (x.requires_grad()) {
        Real* gx = const_cast<Real*>(x.grad_data());
        const std::size_t n = pixels * c;
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[i];
      }
      if (b.requires_grad()) {
        Real* gb = const_cast<Real*>(b.grad_data());
        for (std::size_t p = 0; p < pixels; ++p)
          for (int j = 0; j < c; ++j) gb[j] += g[p * c + j];
      }
    });
  }
  return out;
}

// Per-image, per-channel normalization over the spatial extent, with learned
// scale/shift. Statistics come from the one image, so behaviour does not
// depend on the batch.
template <typename Real>
Tensor<Real> instance_norm(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& gamma,
                           const Tensor<Real>& beta, Real eps = Real(1e-5)) {
  if (x.ndim() != 4) throw DimensionError("instance_norm: expects [n,h,w,c]");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  if (static_cast<int>(gamma.numel()) != c || static_cast<int>(beta.numel()) != c) {
    throw DimensionError("instance_norm: scale/shift size mismatch");
  }
  const int hw = h * w;
  const bool rg =
      detail::want_grad(tape, x) || detail::want_grad(tape, gamma) || detail::want_grad(tape, beta);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  // xhat retained for the backward pass
  auto xhat = std::make_shared<std::vector<Real>>(x.numel());
  auto inv_std = std::make_shared<std::vector<Real>>(static_cast<std::size_t>(n) * c);
  for (int img = 0; img < n; ++img) {
    const std::size_t base = static_cast<std::size_t>(img) * hw * c;
    for (int ch = 0; ch < c; ++ch) {
      Real mean = 0;
      for (int p = 0; p < hw; ++p) mean += x.data()[base + static_cast<std::size_t>(p) * c + ch];
      mean /= static_cast<Real>(hw);
      Real var = 0;
      for (int p = 0; p < hw; ++p) {
        const Real d = x.data()[base + static_cast<std::size_t>(p) * c + ch] - mean;
        var += d * d;
      }
      var /= static_cast<Real>(hw);
      const Real istd = Real(1) / std::sqrt(var + eps);
      (*inv_std)[static_cast<std::size_t>(img) * c + ch] = istd;
      for (int p = 0; p < hw; ++p) {
        const std::size_t idx = base + static_cast<std::size_t>(p) * c + ch;
        const Real xh = (x.data()[idx] - mean) * istd;
        (*xhat)[idx] = xh;
        out.data()[idx] = gamma.at(ch) * xh + beta.at(ch);
      }
    }
  }
  if (rg) {
    tape->record([x, gamma, beta, out, xhat, inv_std, n, hw, c]() {
      const Real* g = out.grad_data();
      for (int img = 0; img < n; ++img) {
        const std::size_t base = static_cast<std::size_t>(img) * hw * c;
        for (int ch = 0; ch < c; ++ch) {
          Real sum_g = 0, sum_gx = 0;
          for (int p = 0; p < hw; ++p) {
            const std::size_t idx = base + static_cast<std::size_t>(p) * c + ch;
            sum_g += g[idx];
            sum_gx += g[idx] * (*xhat)[idx];
          }
          if (gamma.requires_grad()) const_cast<Real*>(gamma.grad_data())[ch] += sum_gx;
          if (beta.requires_grad()) const_cast<Real*>(beta.grad_data())[ch] += sum_g;
          if (x.requires_grad()) {
            Real* gx = const_cast<Real*>(x.grad_data());
            const Real istd = (*inv_std)[static_cast<std::size_t>(img) * c + ch];
            const Real gam = gamma.at(ch);
            const Real inv_hw = Real(1) / static_cast<Real>(hw);
            for (int p = 0; p < hw; ++p) {
              const std::size_t idx = base + static_cast<std::size_t>(p) * c + ch;
              gx[idx] += gam * istd * (g[idx] - inv_hw * sum_g - inv_hw * (*xhat)[idx] * sum_gx);
            }
          }
        }
      }
    });
  }
  return out;
}

// Conventional batch norm over (n, h, w) per channel. In training mode the
// batch statistics are used and the running buffers updated in place; in
// inference mode the running statistics are used.
template <typename Real>
Tensor<Real> batch_norm(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& gamma,
                        const Tensor<Real>& beta, Tensor<Real>& running_mean,
                        Tensor<Real>& running_var, bool training, Real momentum = Real(0.1),
                        Real eps = Real(1e-5)) {
  if (x.ndim() != 4) throw DimensionError("batch_norm: expects [n,h,w,c]");
  const int c = x.dim(3);
  const std::size_t group = x.numel() / c;
  if (static_cast<int>(gamma.numel()) != c || static_cast<int>(running_mean.numel()) != c) {
    throw DimensionError("batch_norm: parameter size mismatch");
  }
  const bool rg =
      detail::want_grad(tape, x) || detail::want_grad(tape, gamma) || detail::want_grad(tape, beta);
  Tensor<Real> out = detail::make_out<Real>(x.shape(), rg);
  std::vector<Real> mean(c), var(c);
  if (training) {
    for (int ch = 0; ch < c; ++ch) {
      Real m = 0;
      for (std::size_t p = 0; p < group; ++p) m += x.data()[p * c + ch];
      m /= static_cast<Real>(group);
      Real v = 0;
      for (std::size_t p = 0; p < group; ++p) {
        const Real d = x.data()[p * c + ch] - m;
        v += d * d;
      }
      v /= static_cast<Real>(group);
      mean[ch] = m;
      var[ch] = v;
      running_mean.at(ch) = (Real(1) - momentum) * running_mean.at(ch) + momentum * m;
      running_var.at(ch) = (Real(1) - momentum) * running_var.at(ch) + momentum * v;
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mean[ch] = running_mean.at(ch);
      var[ch] = running_var.at(ch);
    }
  }
  auto xhat = std::make_shared<std::vector<Real>>(x.numel());
  auto inv_std = std::make_shared<std::vector<Real>>(c);
  for (int ch = 0; ch < c; ++ch) (*inv_std)[ch] = Real(1) / std::sqrt(var[ch] + eps);
  for (std::size_t p = 0; p < group; ++p) {
    for (int ch = 0; ch < c; ++ch) {
      const Real xh = (x.data()[p * c + ch] - mean[ch]) * (*inv_std)[ch];
      (*xhat)[p * c + ch] = xh;
      out.data()[p * c + ch] = gamma.at(ch) * xh + beta.at(ch);
    }
  }
  if (rg) {
    tape->record([x, gamma, beta, out, xhat, inv_std, group, c, training]() {
      const Real* g = out.grad_data();
      for (int ch = 0; ch < c; ++ch) {
        Real sum_g = 0, sum_gx = 0;
        for (std::size_t p = 0; p < group; ++p) {
          sum_g += g[p * c + ch];
          sum_gx += g[p * c + ch] * (*xhat)[p * c + ch];
        }
        if (gamma.requires_grad()) const_cast<Real*>(gamma.grad_data())[ch] += sum_gx;
        if (beta.requires_grad()) const_cast<Real*>(beta.grad_data())[ch] += sum_g;
        if (x.requires_grad()) {
          Real* gx = const_cast<Real*>(x.grad_data());
          const Real istd = (*inv_std)[ch];
          const Real gam = gamma.at(ch);
          const Real inv_n = Real(1) / static_cast<Real>(group);
          for (std::size_t p = 0; p < group; ++p) {
            const std::size_t idx = p * c + ch;
            if (training) {
              gx[idx] += gam * istd * (g[idx] - inv_n * sum_g - inv_n * (*xhat)[idx] * sum_gx);
            } else {
              gx[idx] += gam * istd * g[idx];
            }
          }
        }
      }
    });
  }
  return out;
}

}  // namespace ava
