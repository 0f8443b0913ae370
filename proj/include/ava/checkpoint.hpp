// include/ava/checkpoint.hpp

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

// Flat named-array checkpoint: "AVCK" magic, version, element dtype, a
// key=value metadata block, then (name, shape, raw little-endian values)
// records. Parameters store their AMSGrad state under <name>.m/.v/.vhat.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ava/optim.hpp"

namespace ava {

constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail_ckpt {

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

inline void write_str(std::ostream& out, const std::string& s) {
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_str(std::istream& in) {
  const auto n = read_pod<std::uint16_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

template <typename Real>
void write_array(std::ostream& out, const std::string& name, const std::vector<int>& shape,
                 const std::vector<Real>& data) {
  write_str(out, name);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
  for (int d : shape) write_pod<std::int32_t>(out, d);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(Real)));
}

}  // namespace detail_ckpt

template <typename Real>
void save_checkpoint(const std::string& path, const ParamStore<Real>& params,
                     const std::map<std::string, std::string>& meta) {
  using namespace detail_ckpt;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write("AVCK", 4);
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(sizeof(Real)));

  std::map<std::string, std::string> full = meta;
  full["step"] = std::to_string(params.step());
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(full.size()));
  for (const auto& [k, v] : full) {
    write_str(out, k);
    write_str(out, v);
  }

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.size() * 4));
  for (const auto& p : params.items()) {
    write_array<Real>(out, p->name, p->tensor.shape(), p->tensor.values());
    const std::vector<int> flat = {static_cast<int>(p->tensor.numel())};
    write_array<Real>(out, p->name + ".m", flat, p->m);
    write_array<Real>(out, p->name + ".v", flat, p->v);
    write_array<Real>(out, p->name + ".vhat", flat, p->vhat);
  }
  if (!out) throw DataError("short write to checkpoint: " + path);
}

// Header and metadata only (for architecture screening before a load).
inline std::map<std::string, std::string> read_checkpoint_meta(const std::string& path) {
  using namespace detail_ckpt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AVCK", 4) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  read_pod<std::uint32_t>(in);  // version
  read_pod<std::uint8_t>(in);   // dtype
  std::map<std::string, std::string> meta;
  const auto n_meta = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_str(in);
    meta[k] = read_str(in);
  }
  if (!in) throw DataError("truncated checkpoint metadata: " + path);
  return meta;
}

// Loads into an already constructed (architecture-matching) store. Reports
// mismatched names/shapes as config errors naming the offender.
template <typename Real>
std::map<std::string, std::string> load_checkpoint(const std::string& path,
                                                   ParamStore<Real>& params) {
  using namespace detail_ckpt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AVCK", 4) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto dtype = read_pod<std::uint8_t>(in);
  if (dtype != 4 && dtype != 8) throw DataError("bad checkpoint dtype");

  std::map<std::string, std::string> meta;
  const auto n_meta = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_str(in);
    meta[k] = read_str(in);
  }

  const auto n_arrays = read_pod<std::uint32_t>(in);
  std::size_t loaded = 0;
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    const std::string name = read_str(in);
    const auto ndim = read_pod<std::uint8_t>(in);
    std::vector<int> shape(ndim);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = read_pod<std::int32_t>(in);
      numel *= static_cast<std::size_t>(d);
    }
    std::vector<double> data(numel);
    if (dtype == 8) {
      std::vector<double> raw(numel);
      in.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(numel * sizeof(double)));
      data = std::move(raw);
    } else {
      std::vector<float> raw(numel);
      in.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(numel * sizeof(float)));
      std::copy(raw.begin(), raw.end(), data.begin());
    }
    if (!in) throw DataError("truncated checkpoint: " + path);

    // route to tensor or optimizer slabs
    std::string base = name;
    int slot = 0;  // 0 tensor, 1 m, 2 v, 3 vhat
    for (const auto& [suffix, s] :
         {std::pair<const char*, int>{".vhat", 3}, {".m", 1}, {".v", 2}}) {
      const std::string sfx(suffix);
      if (base.size() > sfx.size() && base.ends_with(sfx)) {
        base = base.substr(0, base.size() - sfx.size());
        slot = s;
        break;
      }
    }
    Parameter<Real>* pp = nullptr;
    try {
      pp = &params.at(base);
    } catch (const StateError&) {
      throw ConfigError("checkpoint carries parameter '" + base +
                        "' which this architecture does not have");
    }
    Parameter<Real>& p = *pp;
    if (slot == 0 && p.tensor.shape() != shape) {
      throw ConfigError("checkpoint/model shape mismatch for '" + name + "'");
    }
    if (numel != p.tensor.numel()) {
      throw ConfigError("checkpoint/model size mismatch for '" + name + "'");
    }
    std::vector<Real>& dst = slot == 0   ? p.tensor.values()
                             : slot == 1 ? p.m
                             : slot == 2 ? p.v
                                         : p.vhat;
    for (std::size_t j = 0; j < numel; ++j) dst[j] = static_cast<Real>(data[j]);
    ++loaded;
  }
  if (loaded != params.size() * 4) {
    throw ConfigError("checkpoint is missing parameters (" + std::to_string(loaded) + " arrays for " +
                      std::to_string(params.size()) + " parameters)");
  }
  if (meta.count("step")) params.set_step(std::stoll(meta.at("step")));
  return meta;
}

}  // namespace ava
