// tools/bench_kernels.cpp

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

// Times each hot kernel in its serial reference form and its OpenMP form
// and prints throughput plus speedup.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "ava/common.hpp"
#include "ava/kernels.hpp"

using namespace ava;

namespace {

double time_it(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void report(const char* name, double flops, double t_serial, double t_omp) {
  std::printf("%-34s %9.3f ms  %8.2f GF/s | %9.3f ms  %8.2f GF/s | x%.2f\n", name,
              t_serial * 1e3, flops / t_serial * 1e-9, t_omp * 1e3, flops / t_omp * 1e-9,
              t_serial / t_omp);
}

template <typename T>
void bench_gemm(const char* label, int m, int k, int n, int reps) {
  Rng rng(7);
  std::vector<T> a(static_cast<std::size_t>(m) * k), b(static_cast<std::size_t>(k) * n),
      c(static_cast<std::size_t>(m) * n);
  for (auto& v : a) v = static_cast<T>(rng.uniform(-1, 1));
  for (auto& v : b) v = static_cast<T>(rng.uniform(-1, 1));
  const double flops = 2.0 * m * k * n;
  const double ts = time_it([&] { kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n); },
                            reps);
  double to;
  if (m >= 2 * kernels::num_threads()) {
    to = time_it([&] { kernels::gemm_nn_omp(a.data(), b.data(), c.data(), m, k, n); }, reps);
  } else {
    to = time_it([&] { kernels::gemm_nn_omp_cols(a.data(), b.data(), c.data(), m, k, n); }, reps);
  }
  report(label, flops, ts, to);
}

template <typename T>
void bench_conv(const char* label, kernels::Conv2dShape s, int reps) {
  Rng rng(11);
  std::vector<T> x(static_cast<std::size_t>(s.n) * s.h * s.w * s.c_in),
      k(static_cast<std::size_t>(s.kh) * s.kw * s.c_in * s.c_out),
      y(static_cast<std::size_t>(s.n) * s.out_h() * s.out_w() * s.c_out);
  for (auto& v : x) v = static_cast<T>(rng.uniform(-1, 1));
  for (auto& v : k) v = static_cast<T>(rng.uniform(-1, 1));
  const double flops =
      2.0 * s.n * s.out_h() * s.out_w() * s.kh * s.kw * s.c_in * s.c_out;
  const double ts =
      time_it([&] { kernels::conv2d_forward_serial(x.data(), k.data(), y.data(), s); }, reps);
  const double to =
      time_it([&] { kernels::conv2d_forward_omp(x.data(), k.data(), y.data(), s); }, reps);
  report(label, flops, ts, to);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", kernels::num_threads());
  std::printf("%-34s %25s | %25s | speedup\n", "kernel", "serial", "openmp");

  bench_gemm<float>("sgemm 8x512x1024 (lstm step)", 8, 512, 1024, 200);
  bench_gemm<float>("sgemm 256x256x256", 256, 256, 256, 50);
  bench_gemm<float>("sgemm 512x512x512", 512, 512, 512, 10);
  bench_gemm<double>("dgemm 8x512x1024 (lstm step)", 8, 512, 1024, 100);
  bench_gemm<double>("dgemm 256x256x256", 256, 256, 256, 25);

  bench_conv<float>("sconv 24x36x36 3->8 k3 (table row1)",
                    {24, 36, 36, 3, 3, 3, 8, 1, 1}, 50);
  bench_conv<float>("sconv 24x18x18 16->16 k3",
                    {24, 18, 18, 16, 3, 3, 16, 1, 1}, 50);
  bench_conv<float>("sconv 24x5x5 32->128 k5 (table row10)",
                    {24, 5, 5, 32, 5, 5, 128, 1, 0}, 50);
  bench_conv<double>("dconv 24x36x36 3->8 k3",
                     {24, 36, 36, 3, 3, 3, 8, 1, 1}, 25);
  return 0;
}
