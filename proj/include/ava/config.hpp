// include/ava/config.hpp

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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ava/common.hpp"

namespace ava {

enum class ModelKind { kAudioOnly, kAvAlign, kAvCat };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

// Flat key=value run configuration. Unknown keys are rejected, not ignored:
// a silently dropped hyperparameter is the classic reproduction killer.
struct RunConfig {
  // model selection
  std::string model = "a";  // a | av-align | av-cat

  // architecture constants (defaults are the reference configuration)
  int enc_layers = 3;
  int enc_units = 256;
  int dec_units = 256;
  int heads = 4;
  int mel_bins = 30;
  int visual_dim = 128;
  int attn_units = 256;
  int char_emb = 64;
  std::string score = "additive";         // additive | dot
  std::string fusion_mix = "cell_input";  // cell_input | post_mix
  std::string visual_norm = "instance";   // instance | batch

  // optimizer
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // 0 disables clipping

  // run control
  std::uint64_t seed = 1;
  int max_steps = 2000;
  int batch_size = 8;
  int checkpoint_every = 500;
  int log_every = 25;
  int precision = 32;  // 32 | 64
  std::string data_dir = "data/synth";
  std::string out_dir = "runs/default";
  std::string resume;

  // noise condition (training is matched to train_snr_db unless
  // train_clean_eval_noisy is set)
  std::string noise = "none";  // none | wgn | cafe | street
  double train_snr_db = 0.0;
  std::vector<double> eval_snr_db = {10.0, 0.0, -5.0};
  bool train_clean_eval_noisy = false;
  bool dump_attention = false;

  // decoding
  std::string decode = "greedy";  // greedy | beam
  int beam_width = 4;

  // synthetic corpus (prepare)
  int synth_utterances = 20;
  int synth_chars_min = 3;
  int synth_chars_max = 6;
  int synth_inventory = 12;
  std::string synth_ambiguity;  // comma-separated pairs, e.g. "be,cg"

  static RunConfig from_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);
  void apply_key(const std::string& key, const std::string& value);
  void validate() const;

  ModelKind kind() const { return model_kind_from_string(model); }

  // full resolved configuration, one key=value per line, sorted keys
  std::string to_manifest_text() const;
  // architecture keys a checkpoint must agree on
  std::map<std::string, std::string> arch_fingerprint() const;
};

std::vector<double> parse_double_list(const std::string& csv);

}  // namespace ava
