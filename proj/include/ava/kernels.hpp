// include/ava/kernels.hpp

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

// Dense numeric kernels behind the tensor ops. Every kernel exists in a
// serial reference form and an OpenMP form; both call the same inner-loop
// helpers, so for a given build their outputs are bit-identical for any
// thread count (each output element is written by exactly one thread and
// accumulated in a fixed order).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "ava/common.hpp"

namespace ava::kernels {

// Runtime switch between the serial reference and the OpenMP path.
void set_parallel(bool on);
bool parallel_enabled();
int num_threads();

namespace detail {

// c[0..n) (+)= scale * b[0..n)
template <typename T>
inline void axpy_row(T* c, const T* b, T scale, int n) {
  for (int j = 0; j < n; ++j) c[j] += scale * b[j];
}

template <typename T>
inline void gemm_row(T* c_row, const T* a_row, const T* b, int k, int n) {
  for (int kk = 0; kk < k; ++kk) {
    axpy_row(c_row, b + static_cast<std::size_t>(kk) * n, a_row[kk], n);
  }
}

}  // namespace detail

// c[m x n] = a[m x k] * b[k x n]; accumulates into c when acc is set.
template <typename T>
void gemm_nn_serial(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    if (!acc) std::fill(c_row, c_row + n, T(0));
    detail::gemm_row(c_row, a + static_cast<std::size_t>(i) * k, b, k, n);
  }
}

template <typename T>
void gemm_nn_omp(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    if (!acc) std::fill(c_row, c_row + n, T(0));
    detail::gemm_row(c_row, a + static_cast<std::size_t>(i) * k, b, k, n);
  }
}

// Row-parallel gemm starves when m is small (a per-step LSTM batch has
// m = batch size), so split the columns of c instead.
template <typename T>
void gemm_nn_omp_cols(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
  const int nt = num_threads();
  const int chunk = (n + nt - 1) / nt;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < nt; ++t) {
    const int j0 = t * chunk;
    const int j1 = std::min(n, j0 + chunk);
    if (j0 >= j1) continue;
    for (int i = 0; i < m; ++i) {
      T* c_row = c + static_cast<std::size_t>(i) * n;
      if (!acc) std::fill(c_row + j0, c_row + j1, T(0));
      const T* a_row = a + static_cast<std::size_t>(i) * k;
      for (int kk = 0; kk < k; ++kk) {
        detail::axpy_row(c_row + j0, b + static_cast<std::size_t>(kk) * n + j0, a_row[kk], j1 - j0);
      }
    }
  }
}

template <typename T>
void gemm_nn(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
  if (!parallel_enabled() || static_cast<std::size_t>(m) * k * n < 16384) {
    gemm_nn_serial(a, b, c, m, k, n, acc);
  } else if (m >= 2 * num_threads()) {
    gemm_nn_omp(a, b, c, m, k, n, acc);
  } else {
    gemm_nn_omp_cols(a, b, c, m, k, n, acc);
  }
}

// out[n x m] = in[m x n] transposed.
template <typename T>
void transpose(const T* in, T* out, int m, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(j) * m + i] = in[static_cast<std::size_t>(i) * n + j];
}

namespace detail {

// dot over contiguous rows with eight independent accumulator chains; the
// reduction order is fixed, so results do not depend on the build's
// vector width or the thread count.
template <typename T>
inline T dot_row(const T* a, const T* b, int n) {
  T acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int j = 0;
  for (; j + 8 <= n; j += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[j + l] * b[j + l];
  }
  for (; j < n; ++j) acc[j % 8] += a[j] * b[j];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace detail

// c[m x k] (+)= a[m x n] * b[k x n]^T; both operands are read row-wise, no
// transposed copy is formed.
template <typename T>
void gemm_nt_serial(const T* a, const T* b, T* c, int m, int n, int k, bool acc = false) {
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const T d = detail::dot_row(a + static_cast<std::size_t>(i) * n,
                                  b + static_cast<std::size_t>(kk) * n, n);
      T* out = c + static_cast<std::size_t>(i) * k + kk;
      *out = acc ? *out + d : d;
    }
  }
}

template <typename T>
void gemm_nt_omp(const T* a, const T* b, T* c, int m, int n, int k, bool acc = false) {
  const int total = m * k;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < total; ++idx) {
    const int i = idx / k;
    const int kk = idx % k;
    const T d = detail::dot_row(a + static_cast<std::size_t>(i) * n,
                                b + static_cast<std::size_t>(kk) * n, n);
    T* out = c + static_cast<std::size_t>(idx);
    *out = acc ? *out + d : d;
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int n, int k, bool acc = false) {
  if (!parallel_enabled() || static_cast<std::size_t>(m) * n * k < 16384) {
    gemm_nt_serial(a, b, c, m, n, k, acc);
  } else {
    gemm_nt_omp(a, b, c, m, n, k, acc);
  }
}

// c[k x n] (+)= a[m x k]^T * b[m x n]; the inner update runs over contiguous
// rows of b and c.
template <typename T>
void gemm_tn_serial(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
  if (!acc) std::fill(c, c + static_cast<std::size_t>(k) * n, T(0));
  for (int kk = 0; kk < k; ++kk) {
    T* c_row = c + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      detail::axpy_row(c_row, b + static_cast<std::size_t>(i) * n,
                       a[static_cast<std::size_t>(i) * k + kk], n);
    }
  }
}

template <typename T>
void gemm_tn_omp(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
#pragma omp parallel for schedule(static)
  for (int kk = 0; kk < k; ++kk) {
    T* c_row = c + static_cast<std::size_t>(kk) * n;
    if (!acc) std::fill(c_row, c_row + n, T(0));
    for (int i = 0; i < m; ++i) {
      detail::axpy_row(c_row, b + static_cast<std::size_t>(i) * n,
                       a[static_cast<std::size_t>(i) * k + kk], n);
    }
  }
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
  if (!parallel_enabled() || static_cast<std::size_t>(m) * k * n < 16384) {
    gemm_tn_serial(a, b, c, m, k, n, acc);
  } else {
    gemm_tn_omp(a, b, c, m, k, n, acc);
  }
}

struct Conv2dShape {
  int n, h, w, c_in;        // input  [n, h, w, c_in]
  int kh, kw, c_out;        // kernel [kh, kw, c_in, c_out]
  int stride, pad;
  int out_h() const { return (h + 2 * pad - kh) / stride + 1; }
  int out_w() const { return (w + 2 * pad - kw) / stride + 1; }
};

namespace detail {

// One output pixel: y[n, oy, ox, 0..c_out) as a kernel-window reduction.
template <typename T>
inline void conv_pixel(const T* x, const T* k, T* y_pix, const Conv2dShape& s, int img, int oy,
                       int ox) {
  std::fill(y_pix, y_pix + s.c_out, T(0));
  const std::size_t xs_img = static_cast<std::size_t>(s.h) * s.w * s.c_in;
  for (int ky = 0; ky < s.kh; ++ky) {
    const int iy = oy * s.stride - s.pad + ky;
    if (iy < 0 || iy >= s.h) continue;
    for (int kx = 0; kx < s.kw; ++kx) {
      const int ix = ox * s.stride - s.pad + kx;
      if (ix < 0 || ix >= s.w) continue;
      const T* x_pix = x + xs_img * img + (static_cast<std::size_t>(iy) * s.w + ix) * s.c_in;
      const T* k_pix = k + (static_cast<std::size_t>(ky) * s.kw + kx) * s.c_in * s.c_out;
      for (int ci = 0; ci < s.c_in; ++ci) {
        axpy_row(y_pix, k_pix + static_cast<std::size_t>(ci) * s.c_out, x_pix[ci], s.c_out);
      }
    }
  }
}

// Gradient w.r.t. one input pixel, gathered over the output positions that
// read it. Gather (not scatter) keeps one writer per element.
template <typename T>
inline void conv_dx_pixel(const T* dy, const T* k, T* dx_pix, const Conv2dShape& s, int img,
                          int iy, int ix) {
  std::fill(dx_pix, dx_pix + s.c_in, T(0));
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t ys_img = static_cast<std::size_t>(oh) * ow * s.c_out;
  for (int ky = 0; ky < s.kh; ++ky) {
    const int num = iy + s.pad - ky;
    if (num < 0 || num % s.stride) continue;
    const int oy = num / s.stride;
    if (oy >= oh) continue;
    for (int kx = 0; kx < s.kw; ++kx) {
      const int numx = ix + s.pad - kx;
      if (numx < 0 || numx % s.stride) continue;
      const int ox = numx / s.stride;
      if (ox >= ow) continue;
      const T* dy_pix = dy + ys_img * img + (static_cast<std::size_t>(oy) * ow + ox) * s.c_out;
      const T* k_pix =
          k + (static_cast<std::size_t>(ky) * s.kw + kx) * s.c_in * s.c_out;
      for (int ci = 0; ci < s.c_in; ++ci) {
        T acc = 0;
        const T* k_ci = k_pix + static_cast<std::size_t>(ci) * s.c_out;
        for (int co = 0; co < s.c_out; ++co) acc += dy_pix[co] * k_ci[co];
        dx_pix[ci] += acc;
      }
    }
  }
}

// Gradient w.r.t. one kernel tap row dk[ky, kx, ci, 0..c_out).
template <typename T>
inline void conv_dk_row(const T* x, const T* dy, T* dk_row, const Conv2dShape& s, int ky, int kx,
                        int ci) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t xs_img = static_cast<std::size_t>(s.h) * s.w * s.c_in;
  const std::size_t ys_img = static_cast<std::size_t>(oh) * ow * s.c_out;
  std::fill(dk_row, dk_row + s.c_out, T(0));
  for (int img = 0; img < s.n; ++img) {
    for (int oy = 0; oy < oh; ++oy) {
      const int iy = oy * s.stride - s.pad + ky;
      if (iy < 0 || iy >= s.h) continue;
      for (int ox = 0; ox < ow; ++ox) {
        const int ix = ox * s.stride - s.pad + kx;
        if (ix < 0 || ix >= s.w) continue;
        const T xv = x[xs_img * img + (static_cast<std::size_t>(iy) * s.w + ix) * s.c_in + ci];
        const T* dy_pix = dy + ys_img * img + (static_cast<std::size_t>(oy) * ow + ox) * s.c_out;
        axpy_row(dk_row, dy_pix, xv, s.c_out);
      }
    }
  }
}

}  // namespace detail

template <typename T>
void conv2d_forward_serial(const T* x, const T* k, T* y, const Conv2dShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  for (int img = 0; img < s.n; ++img)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        detail::conv_pixel(x, k, y + ((static_cast<std::size_t>(img) * oh + oy) * ow + ox) * s.c_out,
                           s, img, oy, ox);
}

template <typename T>
void conv2d_forward_omp(const T* x, const T* k, T* y, const Conv2dShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const int total = s.n * oh * ow;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < total; ++idx) {
    const int img = idx / (oh * ow);
    const int oy = (idx / ow) % oh;
    const int ox = idx % ow;
    detail::conv_pixel(x, k, y + static_cast<std::size_t>(idx) * s.c_out, s, img, oy, ox);
  }
}

template <typename T>
void conv2d_forward(const T* x, const T* k, T* y, const Conv2dShape& s) {
  if (parallel_enabled() && s.n * s.out_h() * s.out_w() >= 4) {
    conv2d_forward_omp(x, k, y, s);
  } else {
    conv2d_forward_serial(x, k, y, s);
  }
}

template <typename T>
void conv2d_backward_input_serial(const T* dy, const T* k, T* dx, const Conv2dShape& s) {
  for (int img = 0; img < s.n; ++img)
    for (int iy = 0; iy < s.h; ++iy)
      for (int ix = 0; ix < s.w; ++ix)
        detail::conv_dx_pixel(dy, k,
                              dx + ((static_cast<std::size_t>(img) * s.h + iy) * s.w + ix) * s.c_in,
                              s, img, iy, ix);
}

template <typename T>
void conv2d_backward_input_omp(const T* dy, const T* k, T* dx, const Conv2dShape& s) {
  const int total = s.n * s.h * s.w;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < total; ++idx) {
    const int img = idx / (s.h * s.w);
    const int iy = (idx / s.w) % s.h;
    const int ix = idx % s.w;
    detail::conv_dx_pixel(dy, k, dx + static_cast<std::size_t>(idx) * s.c_in, s, img, iy, ix);
  }
}

template <typename T>
void conv2d_backward_input(const T* dy, const T* k, T* dx, const Conv2dShape& s) {
  if (parallel_enabled() && s.n * s.h * s.w >= 4) {
    conv2d_backward_input_omp(dy, k, dx, s);
  } else {
    conv2d_backward_input_serial(dy, k, dx, s);
  }
}

template <typename T>
void conv2d_backward_kernel_serial(const T* x, const T* dy, T* dk, const Conv2dShape& s) {
  for (int ky = 0; ky < s.kh; ++ky)
    for (int kx = 0; kx < s.kw; ++kx)
      for (int ci = 0; ci < s.c_in; ++ci)
        detail::conv_dk_row(x, dy,
                            dk + ((static_cast<std::size_t>(ky) * s.kw + kx) * s.c_in + ci) * s.c_out,
                            s, ky, kx, ci);
}

template <typename T>
void conv2d_backward_kernel_omp(const T* x, const T* dy, T* dk, const Conv2dShape& s) {
  const int total = s.kh * s.kw * s.c_in;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < total; ++idx) {
    const int ky = idx / (s.kw * s.c_in);
    const int kx = (idx / s.c_in) % s.kw;
    const int ci = idx % s.c_in;
    detail::conv_dk_row(x, dy, dk + static_cast<std::size_t>(idx) * s.c_out, s, ky, kx, ci);
  }
}

template <typename T>
void conv2d_backward_kernel(const T* x, const T* dy, T* dk, const Conv2dShape& s) {
  if (parallel_enabled() && s.kh * s.kw * s.c_in >= 4) {
    conv2d_backward_kernel_omp(x, dy, dk, s);
  } else {
    conv2d_backward_kernel_serial(x, dy, dk, s);
  }
}

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& buf);

}  // namespace ava::kernels
