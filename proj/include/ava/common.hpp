// include/ava/common.hpp

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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ava {

// Process exit codes used by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailure = 1,
  kExitDataError = 2,
  kExitConfigError = 3,
};

// A tensor/matrix operation received incompatibly shaped inputs.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg)
      : std::runtime_error("dimension error: " + msg) {}
};

// Bad or unusable input data (empty waveform, corrupt file, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg)
      : std::runtime_error("data error: " + msg) {}
};

// Invalid configuration (unknown key, out-of-range value, arch mismatch).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg)
      : std::runtime_error("config error: " + msg) {}
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg)
      : std::runtime_error("numeric error: " + msg) {}
};

// An API was driven in an invalid order (e.g. optimizer step without grads).
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg)
      : std::runtime_error("state error: " + msg) {}
};

// A symbol outside the character vocabulary.
class VocabError : public DataError {
 public:
  explicit VocabError(const std::string& msg) : DataError("vocabulary: " + msg) {}
};

// Deterministic RNG. Distributions are hand-rolled so that streams are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  // Independent child stream, keyed so sub-streams do not collide.
  Rng fork(std::uint64_t key) const {
    std::uint64_t z = state_ ^ (key * 0xff51afd7ed558ccdull + 0x2545f4914f6cdd1dull);
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
    return Rng(z ^ (z >> 29));
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a, used for dataset hashes and derived seeds.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

}  // namespace ava
