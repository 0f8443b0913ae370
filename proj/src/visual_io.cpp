// src/visual_io.cpp

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

#include <cstdint>
#include <cstring>
#include <fstream>

#include "ava/fusion.hpp"
#include "ava/visual.hpp"

namespace ava {

void write_frame_file(const std::string& path, const Tensor<double>& frames) {
  if (frames.ndim() != 4 || frames.dim(1) != kFrameSize || frames.dim(2) != kFrameSize ||
      frames.dim(3) != kFrameChannels) {
    throw DimensionError("frame file: tensor must be [T x 36 x 36 x 3], got " +
                         frames.shape_str());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write frame file: " + path);
  const std::uint32_t hdr[4] = {static_cast<std::uint32_t>(frames.dim(0)),
                                static_cast<std::uint32_t>(kFrameSize),
                                static_cast<std::uint32_t>(kFrameSize),
                                static_cast<std::uint32_t>(kFrameChannels)};
  out.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  std::vector<float> f32(frames.values().begin(), frames.values().end());
  out.write(reinterpret_cast<const char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
  if (!out) throw DataError("short write to frame file: " + path);
}

Tensor<double> read_frame_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open frame file: " + path);
  std::uint32_t hdr[4];
  in.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!in || hdr[1] != kFrameSize || hdr[2] != kFrameSize || hdr[3] != kFrameChannels) {
    throw DataError("bad frame file header: " + path);
  }
  const std::size_t n =
      static_cast<std::size_t>(hdr[0]) * kFrameSize * kFrameSize * kFrameChannels;
  std::vector<float> f32(n);
  in.read(reinterpret_cast<char*>(f32.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw DataError("truncated frame file: " + path);
  Tensor<double> out({static_cast<int>(hdr[0]), kFrameSize, kFrameSize, kFrameChannels});
  std::copy(f32.begin(), f32.end(), out.values().begin());
  return out;
}

std::string alignment_to_csv(const std::vector<std::vector<double>>& alpha) {
  std::string out;
  char buf[32];
  for (const auto& row : alpha) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.6f", row[j]);
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ava
