// tests/test_kernels.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <vector>

#include "ava/common.hpp"
#include "ava/kernels.hpp"

using namespace ava;
using kernels::Conv2dShape;

namespace {

// naive triple loop, the reference for the reference
template <typename T>
std::vector<T> gemm_naive(const std::vector<T>& a, const std::vector<T>& b, int m, int k, int n) {
  std::vector<T> c(static_cast<std::size_t>(m) * n, T(0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = 0;
      for (int kk = 0; kk < k; ++kk) acc += a[i * k + kk] * b[kk * n + j];
      c[i * n + j] = acc;
    }
  return c;
}

template <typename T>
std::vector<T> random_vec(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1, 1));
  return v;
}

}  // namespace

TEST_CASE("gemm serial matches naive reference") {
  Rng rng(1);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 4, 2}, {8, 17, 5}, {31, 7, 13}}) {
    auto a = random_vec<double>(static_cast<std::size_t>(m) * k, rng);
    auto b = random_vec<double>(static_cast<std::size_t>(k) * n, rng);
    std::vector<double> c(static_cast<std::size_t>(m) * n);
    kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n);
    auto ref = gemm_naive(a, b, m, k, n);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("gemm omp variants are bit-identical to serial") {
  Rng rng(2);
  for (auto [m, k, n] : {std::tuple{2, 64, 96}, {64, 64, 64}, {5, 33, 129}, {128, 16, 7}}) {
    auto a = random_vec<float>(static_cast<std::size_t>(m) * k, rng);
    auto b = random_vec<float>(static_cast<std::size_t>(k) * n, rng);
    std::vector<float> cs(static_cast<std::size_t>(m) * n), co(cs.size()), cc(cs.size());
    kernels::gemm_nn_serial(a.data(), b.data(), cs.data(), m, k, n);
    kernels::gemm_nn_omp(a.data(), b.data(), co.data(), m, k, n);
    kernels::gemm_nn_omp_cols(a.data(), b.data(), cc.data(), m, k, n);
    CHECK(cs == co);
    CHECK(cs == cc);
  }
}

TEST_CASE("gemm accumulate flag adds on top of existing values") {
  Rng rng(3);
  const int m = 4, k = 5, n = 6;
  auto a = random_vec<double>(m * k, rng);
  auto b = random_vec<double>(k * n, rng);
  std::vector<double> c(m * n, 1.0);
  kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n, /*acc=*/true);
  auto ref = gemm_naive(a, b, m, k, n);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(1.0 + ref[i]));
}

TEST_CASE("gemm_nt matches naive a*b^T, serial and omp bit-identical") {
  Rng rng(21);
  for (auto [m, n, k] : {std::tuple{3, 17, 5}, {8, 129, 64}, {1, 1024, 512}}) {
    auto a = random_vec<float>(static_cast<std::size_t>(m) * n, rng);
    auto b = random_vec<float>(static_cast<std::size_t>(k) * n, rng);
    std::vector<float> cs(static_cast<std::size_t>(m) * k, 1.0f), co = cs;
    kernels::gemm_nt_serial(a.data(), b.data(), cs.data(), m, n, k, /*acc=*/true);
    kernels::gemm_nt_omp(a.data(), b.data(), co.data(), m, n, k, /*acc=*/true);
    CHECK(cs == co);
    for (int i = 0; i < m; ++i)
      for (int kk = 0; kk < k; ++kk) {
        double want = 1.0;
        for (int j = 0; j < n; ++j) want += static_cast<double>(a[i * n + j]) * b[kk * n + j];
        CHECK(cs[static_cast<std::size_t>(i) * k + kk] ==
              doctest::Approx(want).epsilon(2e-4));
      }
  }
}

TEST_CASE("gemm_tn matches naive a^T*b, serial and omp bit-identical") {
  Rng rng(22);
  for (auto [m, k, n] : {std::tuple{4, 5, 7}, {8, 64, 129}, {2, 512, 96}}) {
    auto a = random_vec<float>(static_cast<std::size_t>(m) * k, rng);
    auto b = random_vec<float>(static_cast<std::size_t>(m) * n, rng);
    std::vector<float> cs(static_cast<std::size_t>(k) * n, 0.5f), co = cs;
    kernels::gemm_tn_serial(a.data(), b.data(), cs.data(), m, k, n, /*acc=*/true);
    kernels::gemm_tn_omp(a.data(), b.data(), co.data(), m, k, n, /*acc=*/true);
    CHECK(cs == co);
    for (int kk = 0; kk < k; ++kk)
      for (int j = 0; j < n; ++j) {
        double want = 0.5;
        for (int i = 0; i < m; ++i) want += static_cast<double>(a[i * k + kk]) * b[i * n + j];
        CHECK(cs[static_cast<std::size_t>(kk) * n + j] ==
              doctest::Approx(want).epsilon(2e-4));
      }
  }
}

TEST_CASE("transpose round trip") {
  Rng rng(4);
  auto a = random_vec<double>(6 * 11, rng);
  std::vector<double> at(11 * 6), back(6 * 11);
  kernels::transpose(a.data(), at.data(), 6, 11);
  kernels::transpose(at.data(), back.data(), 11, 6);
  CHECK(a == back);
}

TEST_CASE("conv2d output dims follow the standard formula") {
  Conv2dShape s{1, 9, 9, 2, 3, 3, 4, 2, 1};
  CHECK(s.out_h() == 5);
  CHECK(s.out_w() == 5);
  Conv2dShape t{1, 36, 36, 3, 3, 3, 8, 1, 1};
  CHECK(t.out_h() == 36);
  CHECK(t.out_w() == 36);
}

TEST_CASE("conv2d matches a direct sliding-window evaluation") {
  Rng rng(5);
  Conv2dShape s{2, 6, 5, 3, 3, 3, 4, 1, 1};
  auto x = random_vec<double>(static_cast<std::size_t>(s.n) * s.h * s.w * s.c_in, rng);
  auto k = random_vec<double>(static_cast<std::size_t>(s.kh) * s.kw * s.c_in * s.c_out, rng);
  std::vector<double> y(static_cast<std::size_t>(s.n) * s.out_h() * s.out_w() * s.c_out);
  kernels::conv2d_forward_serial(x.data(), k.data(), y.data(), s);

  for (int img = 0; img < s.n; ++img)
    for (int oy = 0; oy < s.out_h(); ++oy)
      for (int ox = 0; ox < s.out_w(); ++ox)
        for (int co = 0; co < s.c_out; ++co) {
          double acc = 0;
          for (int ky = 0; ky < s.kh; ++ky)
            for (int kx = 0; kx < s.kw; ++kx)
              for (int ci = 0; ci < s.c_in; ++ci) {
                const int iy = oy * s.stride - s.pad + ky;
                const int ix = ox * s.stride - s.pad + kx;
                if (iy < 0 || iy >= s.h || ix < 0 || ix >= s.w) continue;
                acc += x[((static_cast<std::size_t>(img) * s.h + iy) * s.w + ix) * s.c_in + ci] *
                       k[((static_cast<std::size_t>(ky) * s.kw + kx) * s.c_in + ci) * s.c_out + co];
              }
          const double got =
              y[((static_cast<std::size_t>(img) * s.out_h() + oy) * s.out_w() + ox) * s.c_out + co];
          CHECK(got == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("conv2d omp paths are bit-identical to serial") {
  Rng rng(6);
  Conv2dShape s{3, 12, 10, 4, 3, 3, 6, 2, 1};
  auto x = random_vec<float>(static_cast<std::size_t>(s.n) * s.h * s.w * s.c_in, rng);
  auto k = random_vec<float>(static_cast<std::size_t>(s.kh) * s.kw * s.c_in * s.c_out, rng);
  const std::size_t ny = static_cast<std::size_t>(s.n) * s.out_h() * s.out_w() * s.c_out;

  std::vector<float> ys(ny), yo(ny);
  kernels::conv2d_forward_serial(x.data(), k.data(), ys.data(), s);
  kernels::conv2d_forward_omp(x.data(), k.data(), yo.data(), s);
  CHECK(ys == yo);

  auto dy = random_vec<float>(ny, rng);
  std::vector<float> dxs(x.size()), dxo(x.size());
  kernels::conv2d_backward_input_serial(dy.data(), k.data(), dxs.data(), s);
  kernels::conv2d_backward_input_omp(dy.data(), k.data(), dxo.data(), s);
  CHECK(dxs == dxo);

  std::vector<float> dks(k.size()), dko(k.size());
  kernels::conv2d_backward_kernel_serial(x.data(), dy.data(), dks.data(), s);
  kernels::conv2d_backward_kernel_omp(x.data(), dy.data(), dko.data(), s);
  CHECK(dks == dko);
}

TEST_CASE("1x1 identity kernel passes a single-channel image through") {
  Conv2dShape s{1, 4, 4, 1, 1, 1, 1, 1, 0};
  std::vector<double> x(16), k{1.0}, y(16);
  for (int i = 0; i < 16; ++i) x[i] = i * 0.5;
  kernels::conv2d_forward_serial(x.data(), k.data(), y.data(), s);
  CHECK(x == y);
}

TEST_CASE("fft matches a direct DFT") {
  Rng rng(7);
  const int n = 64;
  std::vector<std::complex<double>> buf(n);
  for (auto& v : buf) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  auto input = buf;
  kernels::fft_radix2(buf);
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc(0, 0);
    for (int t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * k * t / n;
      acc += input[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    CHECK(std::abs(buf[k] - acc) < 1e-9);
  }
}

TEST_CASE("fft rejects non power-of-two sizes") {
  std::vector<std::complex<double>> buf(12);
  CHECK_THROWS_AS(kernels::fft_radix2(buf), DimensionError);
}
