// src/wav.cpp

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

#include "ava/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ava/common.hpp"

namespace ava {

namespace {

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  read_le<std::uint32_t>(in);
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  Waveform w;

  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const std::uint32_t size = read_le<std::uint32_t>(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(in);
      channels = read_le<std::uint16_t>(in);
      rate = read_le<std::uint32_t>(in);
      read_le<std::uint32_t>(in);  // byte rate
      read_le<std::uint16_t>(in);  // block align
      bits = read_le<std::uint16_t>(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError("WAV data chunk before fmt chunk: " + path);
      if (channels != 1) {
        throw DataError("expected mono WAV, got " + std::to_string(channels) + " channels: " + path);
      }
      if (format == 1 && bits == 16) {
        const std::size_t n = size / 2;
        w.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto s = static_cast<std::int16_t>(read_le<std::uint16_t>(in));
          w.samples[i] = static_cast<double>(s) / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        const std::size_t n = size / 4;
        w.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint32_t u = read_le<std::uint32_t>(in);
          float f;
          std::memcpy(&f, &u, 4);
          w.samples[i] = static_cast<double>(f);
        }
      } else {
        throw DataError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                        std::to_string(bits) + " bit): " + path);
      }
      w.sample_rate = static_cast<int>(rate);
      if (!in) throw DataError("truncated WAV data: " + path);
      return w;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw DataError("WAV file has no data chunk: " + path);
}

void write_wav16(const std::string& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write WAV file: " + path);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, 1);  // PCM
  write_le<std::uint16_t>(out, 1);  // mono
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate * 2));
  write_le<std::uint16_t>(out, 2);
  write_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(
                                     static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  if (!out) throw DataError("short write to WAV file: " + path);
}

}  // namespace ava
