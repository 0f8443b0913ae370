// include/ava/trainer.hpp

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

// Training and evaluation driver. Everything that varies between steps is
// derived deterministically from (seed, utterance id, epoch), so a resumed
// run replays the exact trajectory of an uninterrupted one and two runs
// with the same seed are bit-identical in 64-bit mode.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "ava/checkpoint.hpp"
#include "ava/corpus.hpp"
#include "ava/metrics.hpp"
#include "ava/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ava {

struct Utterance {
  std::string id;
  Waveform audio;              // clean, 22050 Hz
  Tensor<double> frames;       // [T_v x 36 x 36 x 3]; empty for audio-only use
  std::string transcript;
  std::vector<int> target_ids;
  Tensor<double> clean_features;  // unnormalized
};

struct Dataset {
  std::vector<Utterance> utts;
  int skipped = 0;
  std::uint64_t manifest_hash = 0;

  static Dataset load(const std::string& manifest_path, bool need_video,
                      std::ostream& log = std::cerr) {
    Dataset ds;
    std::ifstream raw(manifest_path, std::ios::binary);
    if (raw) {
      const std::string bytes((std::istreambuf_iterator<char>(raw)),
                              std::istreambuf_iterator<char>());
      ds.manifest_hash = fnv1a64(bytes);
    }
    for (const auto& entry : read_manifest(manifest_path)) {
      try {
        Utterance u;
        u.id = entry.utterance_id;
        u.audio = resample(read_wav(entry.audio_path));
        if (need_video) u.frames = read_frame_file(entry.video_path);
        u.transcript = entry.transcript;
        u.target_ids = Vocab::instance().encode(entry.transcript);
        u.clean_features = acoustic_features(u.audio);
        ds.utts.push_back(std::move(u));
      } catch (const DataError& e) {
        log << "warning: skipping " << entry.utterance_id << ": " << e.what() << "\n";
        ++ds.skipped;
      }
    }
    if (ds.utts.empty()) throw DataError("dataset is empty: " + manifest_path);
    return ds;
  }
};

// Noise drawn for one utterance in one epoch (or one eval condition).
inline NoiseSpec derived_noise(const RunConfig& cfg, NoiseKind kind, double snr_db,
                               const std::string& utt_id, std::uint64_t salt) {
  NoiseSpec spec;
  spec.kind = kind;
  spec.snr_db = snr_db;
  spec.seed = fnv1a64(utt_id, cfg.seed ^ (salt * 0x9e3779b97f4a7c15ull + 0x1234567ull));
  return spec;
}

template <typename Real>
ModelInput<Real> make_input(const Utterance& utt, const FeatureNorm& norm,
                            const NoiseSpec& noise, bool need_video) {
  Tensor<double> feats;
  if (noise.kind == NoiseKind::kNone) {
    feats = Tensor<double>::from(utt.clean_features.shape(), utt.clean_features.values());
  } else {
    feats = acoustic_features(apply_noise(utt.audio, noise));
  }
  norm.apply(feats);

  ModelInput<Real> in;
  in.utterance_id = utt.id;
  in.target_ids = utt.target_ids;
  in.audio = Tensor<Real>(feats.shape());
  std::copy(feats.values().begin(), feats.values().end(), in.audio.values().begin());
  if (need_video) {
    in.frames = Tensor<Real>(utt.frames.shape());
    std::copy(utt.frames.values().begin(), utt.frames.values().end(),
              in.frames.values().begin());
  }
  return in;
}

struct TrainOutcome {
  int steps_done = 0;
  double last_loss = 0.0;
  bool nan_aborted = false;
  std::string checkpoint_path;
};

template <typename Real>
std::map<std::string, std::string> checkpoint_meta(const Model<Real>& model) {
  auto meta = model.config().arch_fingerprint();
  meta["feat_norm"] = feature_norm_to_text(model.feature_norm());
  meta["precision"] = std::to_string(sizeof(Real) * 8);
  return meta;
}

template <typename Real>
void load_model_checkpoint(Model<Real>& model, const std::string& path) {
  // architecture agreement, field by field, before touching any array
  auto meta = read_checkpoint_meta(path);
  std::string diffs;
  for (const auto& [k, v] : model.config().arch_fingerprint()) {
    auto it = meta.find(k);
    if (it != meta.end() && it->second != v) {
      diffs += " " + k + "(config=" + v + ", checkpoint=" + it->second + ")";
    }
  }
  if (!diffs.empty()) throw ConfigError("checkpoint architecture mismatch:" + diffs);
  load_checkpoint(path, model.params());
  if (meta.count("feat_norm")) {
    model.feature_norm() = feature_norm_from_text(meta.at("feat_norm"));
  }
}

template <typename Real>
TrainOutcome train_model(Model<Real>& model, const Dataset& data, const RunConfig& cfg,
                         std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string ckpt_path = (fs::path(cfg.out_dir) / "checkpoint.avck").string();

  if (!cfg.resume.empty()) {
    load_model_checkpoint(model, cfg.resume);
  } else {
    std::vector<Tensor<double>> clean;
    for (const auto& u : data.utts) clean.push_back(u.clean_features);
    model.feature_norm().fit(clean);
  }

  const NoiseKind train_kind = (cfg.train_clean_eval_noisy || cfg.noise == "none")
                                   ? NoiseKind::kNone
                                   : noise_kind_from_string(cfg.noise);
  std::vector<long> lengths;
  for (const auto& u : data.utts) lengths.push_back(u.clean_features.rows());
  const int steps_per_epoch =
      static_cast<int>((data.utts.size() + cfg.batch_size - 1) / cfg.batch_size);

  TrainOutcome out;
  out.checkpoint_path = ckpt_path;
  std::vector<std::vector<int>> batches;
  int cached_epoch = -1;

  for (std::int64_t step = model.params().step(); step < cfg.max_steps; ++step) {
    const int epoch = static_cast<int>(step / steps_per_epoch);
    const int batch_idx = static_cast<int>(step % steps_per_epoch);
    if (epoch != cached_epoch) {
      batches = make_batches(lengths, cfg.batch_size, fnv1a64("epoch", cfg.seed) + epoch);
      cached_epoch = epoch;
    }

    std::vector<ModelInput<Real>> inputs;
    for (int idx : batches[batch_idx]) {
      const Utterance& u = data.utts[idx];
      inputs.push_back(make_input<Real>(
          u, model.feature_norm(),
          derived_noise(cfg, train_kind, cfg.train_snr_db, u.id, static_cast<std::uint64_t>(epoch)),
          model.needs_video()));
    }

    Tape<Real> tape;
    ModelForward<Real> fwd = model.loss(&tape, inputs, true);
    const double loss = static_cast<double>(fwd.loss.scalar());
    if (!std::isfinite(loss)) {
      log << "step=" << step << " loss=nan -> aborting, last checkpoint retained\n";
      out.nan_aborted = true;
      out.steps_done = static_cast<int>(step);
      return out;
    }
    backward(tape, fwd.loss);
    if (cfg.clip_norm > 0) model.params().clip_global_norm(cfg.clip_norm);
    model.params().amsgrad_step({cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon});

    out.last_loss = loss;
    out.steps_done = static_cast<int>(step) + 1;
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.max_steps)) {
      log << "step=" << step << " loss=" << loss << " lr=" << cfg.lr << "\n";
    }
    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(ckpt_path, model.params(), checkpoint_meta(model));
    }
  }
  save_checkpoint(ckpt_path, model.params(), checkpoint_meta(model));

  if (cfg.dump_attention && model.kind() == ModelKind::kAvAlign) {
    const std::string attn_dir = (fs::path(cfg.out_dir) / "attn").string();
    fs::create_directories(attn_dir);
    for (const auto& u : data.utts) {
      NoiseSpec none;
      auto [hyp, alignment] =
          model.transcribe(make_input<Real>(u, model.feature_norm(), none, true));
      std::ofstream f(fs::path(attn_dir) / (u.id + ".csv"));
      f << alignment_to_csv(alignment);
    }
  }
  return out;
}

// Micro-averaged score of one (noise kind, snr) condition; decoding is
// parallel per utterance with a deterministic, id-ordered reduction.
template <typename Real>
AggregateScore eval_condition(Model<Real>& model, const Dataset& data, NoiseKind kind,
                              double snr_db, std::vector<std::string>* hypotheses = nullptr) {
  const int n = static_cast<int>(data.utts.size());
  std::vector<std::string> hyps(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const Utterance& u = data.utts[i];
    NoiseSpec spec = derived_noise(model.config(), kind, snr_db, u.id,
                                   fnv1a64("eval") + static_cast<std::uint64_t>(kind) * 131 +
                                       static_cast<std::uint64_t>(snr_db * 8 + 4096));
    hyps[i] = model.transcribe(make_input<Real>(u, model.feature_norm(), spec,
                                                model.needs_video()))
                  .first;
  }
  std::vector<ScoredPair> pairs;
  for (int i = 0; i < n; ++i) pairs.push_back(score_pair(data.utts[i].transcript, hyps[i]));
  if (hypotheses) *hypotheses = hyps;
  return aggregate(pairs);
}

// The reporting grid: every noise kind over clean plus the SNR sweep;
// the clean column is computed once and replicated per kind; white noise
// omits the -5 dB column.
template <typename Real>
ResultsGrid evaluate_grid(Model<Real>& model, const Dataset& data, std::ostream& log) {
  const RunConfig& cfg = model.config();
  std::vector<NoiseKind> kinds;
  if (cfg.noise == "none") {
    kinds = {NoiseKind::kWhiteGaussian, NoiseKind::kCafeteria, NoiseKind::kStreet};
  } else {
    kinds = {noise_kind_from_string(cfg.noise)};
  }

  AggregateScore clean = eval_condition(model, data, NoiseKind::kNone, 0.0);
  log << "eval clean: cer=" << clean.cer << " wer=" << clean.wer << "\n";

  ResultsGrid grid;
  const std::string model_name = to_string(cfg.kind());
  for (NoiseKind kind : kinds) {
    grid.cells.push_back({model_name, to_string(kind), "clean", clean.cer, clean.wer,
                          clean.n_utts});
    for (double snr : cfg.eval_snr_db) {
      if (kind == NoiseKind::kWhiteGaussian && snr == -5.0) continue;  // wgn row carries no -5 dB cell
      AggregateScore s = eval_condition(model, data, kind, snr);
      char snr_text[32];
      std::snprintf(snr_text, sizeof(snr_text), "%g", snr);
      grid.cells.push_back({model_name, to_string(kind), snr_text, s.cer, s.wer, s.n_utts});
      log << "eval " << to_string(kind) << " " << snr_text << " dB: cer=" << s.cer
          << " wer=" << s.wer << "\n";
    }
  }
  grid.validate();
  return grid;
}

}  // namespace ava
