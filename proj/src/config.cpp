// src/config.cpp

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

#include "ava/config.hpp"

#include <fstream>
#include <sstream>

namespace ava {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "a" || s == "audio") return ModelKind::kAudioOnly;
  if (s == "av-align" || s == "av_align") return ModelKind::kAvAlign;
  if (s == "av-cat" || s == "av_cat") return ModelKind::kAvCat;
  throw ConfigError("unknown model: " + s + " (expected a, av-align or av-cat)");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kAudioOnly: return "a";
    case ModelKind::kAvAlign: return "av-align";
    case ModelKind::kAvCat: return "av-cat";
  }
  return "?";
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad number in list: '" + tok + "'");
    }
  }
  return out;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

void RunConfig::apply_key(const std::string& key, const std::string& value) {
  if (key == "model") model = value;
  else if (key == "enc_layers") enc_layers = to_int(key, value);
  else if (key == "enc_units") enc_units = to_int(key, value);
  else if (key == "dec_units") dec_units = to_int(key, value);
  else if (key == "heads") heads = to_int(key, value);
  else if (key == "mel_bins") mel_bins = to_int(key, value);
  else if (key == "visual_dim") visual_dim = to_int(key, value);
  else if (key == "attn_units") attn_units = to_int(key, value);
  else if (key == "char_emb") char_emb = to_int(key, value);
  else if (key == "score") score = value;
  else if (key == "fusion_mix") fusion_mix = value;
  else if (key == "visual_norm") visual_norm = value;
  else if (key == "lr") lr = to_double(key, value);
  else if (key == "beta1") beta1 = to_double(key, value);
  else if (key == "beta2") beta2 = to_double(key, value);
  else if (key == "epsilon") epsilon = to_double(key, value);
  else if (key == "clip_norm") clip_norm = to_double(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "max_steps") max_steps = to_int(key, value);
  else if (key == "batch_size") batch_size = to_int(key, value);
  else if (key == "checkpoint_every") checkpoint_every = to_int(key, value);
  else if (key == "log_every") log_every = to_int(key, value);
  else if (key == "precision") precision = to_int(key, value);
  else if (key == "data_dir") data_dir = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "resume") resume = value;
  else if (key == "noise") noise = value;
  else if (key == "train_snr_db") train_snr_db = to_double(key, value);
  else if (key == "eval_snr_db") eval_snr_db = parse_double_list(value);
  else if (key == "train_clean_eval_noisy") train_clean_eval_noisy = to_bool(key, value);
  else if (key == "dump_attention") dump_attention = to_bool(key, value);
  else if (key == "decode") decode = value;
  else if (key == "beam_width") beam_width = to_int(key, value);
  else if (key == "synth_utterances") synth_utterances = to_int(key, value);
  else if (key == "synth_chars_min") synth_chars_min = to_int(key, value);
  else if (key == "synth_chars_max") synth_chars_max = to_int(key, value);
  else if (key == "synth_inventory") synth_inventory = to_int(key, value);
  else if (key == "synth_ambiguity") synth_ambiguity = value;
  else throw ConfigError("unknown config key: '" + key + "'");
}

void RunConfig::apply_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like key=value, got '" + kv + "'");
  }
  apply_key(kv.substr(0, eq), kv.substr(eq + 1));
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto sb = s.find_first_not_of(" \t");
      const auto se = s.find_last_not_of(" \t");
      return sb == std::string::npos ? std::string() : s.substr(sb, se - sb + 1);
    };
    cfg.apply_key(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::validate() const {
  model_kind_from_string(model);
  if (precision != 32 && precision != 64) {
    throw ConfigError("precision must be 32 or 64, got " + std::to_string(precision));
  }
  if (enc_layers < 1 || enc_units < 1 || dec_units < 1 || heads < 1 || attn_units < 1 ||
      char_emb < 1) {
    throw ConfigError("architecture constants must be positive");
  }
  if (mel_bins != 30) throw ConfigError("mel_bins is fixed at 30 by the frontend");
  if (visual_dim != 128) throw ConfigError("visual_dim is fixed at 128 by the frontend");
  if (batch_size < 1 || max_steps < 0) throw ConfigError("bad batch_size/max_steps");
  if (noise != "none" && noise != "wgn" && noise != "cafe" && noise != "street") {
    throw ConfigError("unknown noise kind: " + noise);
  }
  if (decode != "greedy" && decode != "beam") throw ConfigError("decode must be greedy or beam");
  if (lr <= 0 || beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || epsilon <= 0) {
    throw ConfigError("bad optimizer constants");
  }
}

std::string RunConfig::to_manifest_text() const {
  std::ostringstream os;
  os << "attn_units=" << attn_units << '\n'
     << "batch_size=" << batch_size << '\n'
     << "beam_width=" << beam_width << '\n'
     << "beta1=" << beta1 << '\n'
     << "beta2=" << beta2 << '\n'
     << "char_emb=" << char_emb << '\n'
     << "checkpoint_every=" << checkpoint_every << '\n'
     << "clip_norm=" << clip_norm << '\n'
     << "data_dir=" << data_dir << '\n'
     << "dec_units=" << dec_units << '\n'
     << "decode=" << decode << '\n'
     << "dump_attention=" << (dump_attention ? "true" : "false") << '\n'
     << "enc_layers=" << enc_layers << '\n'
     << "enc_units=" << enc_units << '\n'
     << "epsilon=" << epsilon << '\n'
     << "eval_snr_db=";
  for (std::size_t i = 0; i < eval_snr_db.size(); ++i) os << (i ? "," : "") << eval_snr_db[i];
  os << '\n'
     << "fusion_mix=" << fusion_mix << '\n'
     << "heads=" << heads << '\n'
     << "log_every=" << log_every << '\n'
     << "lr=" << lr << '\n'
     << "max_steps=" << max_steps << '\n'
     << "mel_bins=" << mel_bins << '\n'
     << "model=" << model << '\n'
     << "noise=" << noise << '\n'
     << "out_dir=" << out_dir << '\n'
     << "precision=" << precision << '\n'
     << "resume=" << resume << '\n'
     << "score=" << score << '\n'
     << "seed=" << seed << '\n'
     << "synth_ambiguity=" << synth_ambiguity << '\n'
     << "synth_chars_max=" << synth_chars_max << '\n'
     << "synth_chars_min=" << synth_chars_min << '\n'
     << "synth_inventory=" << synth_inventory << '\n'
     << "synth_utterances=" << synth_utterances << '\n'
     << "train_clean_eval_noisy=" << (train_clean_eval_noisy ? "true" : "false") << '\n'
     << "train_snr_db=" << train_snr_db << '\n'
     << "visual_dim=" << visual_dim << '\n'
     << "visual_norm=" << visual_norm << '\n';
  return os.str();
}

std::map<std::string, std::string> RunConfig::arch_fingerprint() const {
  return {
      {"model", model},
      {"enc_layers", std::to_string(enc_layers)},
      {"enc_units", std::to_string(enc_units)},
      {"dec_units", std::to_string(dec_units)},
      {"heads", std::to_string(heads)},
      {"mel_bins", std::to_string(mel_bins)},
      {"visual_dim", std::to_string(visual_dim)},
      {"attn_units", std::to_string(attn_units)},
      {"char_emb", std::to_string(char_emb)},
      {"score", score},
      {"fusion_mix", fusion_mix},
      {"visual_norm", visual_norm},
  };
}

}  // namespace ava
