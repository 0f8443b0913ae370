// src/runner.cpp

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

#include "ava/runner.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "ava/trainer.hpp"

namespace fs = std::filesystem;

namespace ava {

namespace {

#ifndef AVALIGN_GIT_REV
#define AVALIGN_GIT_REV "unknown"
#endif

SyntheticSpec synth_spec_from_config(const RunConfig& cfg) {
  SyntheticSpec spec;
  spec.seed = cfg.seed;
  spec.n_utterances = cfg.synth_utterances;
  spec.chars_min = cfg.synth_chars_min;
  spec.chars_max = cfg.synth_chars_max;
  spec.inventory = cfg.synth_inventory;
  std::istringstream in(cfg.synth_ambiguity);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    if (tok.size() != 2) throw ConfigError("synth_ambiguity entries must be two letters: " + tok);
    spec.ambiguity_pairs.emplace_back(tok[0], tok[1]);
  }
  return spec;
}

std::uint64_t synth_spec_hash(const SyntheticSpec& spec) {
  std::string repr = std::to_string(spec.seed) + "/" + std::to_string(spec.n_utterances) + "/" +
                     std::to_string(spec.chars_min) + "-" + std::to_string(spec.chars_max) + "/" +
                     std::to_string(spec.inventory) + "/";
  for (auto [a, b] : spec.ambiguity_pairs) {
    repr += a;
    repr += b;
  }
  return fnv1a64(repr);
}

template <typename Real>
int train_with(const RunConfig& cfg, std::ostream& out) {
  Dataset data = Dataset::load((fs::path(cfg.data_dir) / "manifest.csv").string(),
                               cfg.kind() != ModelKind::kAudioOnly, out);
  if (data.skipped > 0) out << "skipped " << data.skipped << " unreadable entries\n";

  fs::create_directories(cfg.out_dir);
  std::ofstream manifest(fs::path(cfg.out_dir) / "manifest.txt");
  manifest << run_manifest_text(cfg, data.manifest_hash);
  manifest.close();

  Model<Real> model(cfg, cfg.seed);
  out << "model=" << cfg.model << " parameters=" << model.params().total_scalars()
      << " precision=" << cfg.precision << "\n";

  std::ofstream log(fs::path(cfg.out_dir) / "train.log");
  struct Tee : std::streambuf {
    std::streambuf *a, *b;
    int overflow(int c) override {
      if (c != EOF) {
        a->sputc(static_cast<char>(c));
        b->sputc(static_cast<char>(c));
      }
      return c;
    }
  } tee;
  tee.a = out.rdbuf();
  tee.b = log.rdbuf();
  std::ostream both(&tee);

  TrainOutcome res = train_model(model, data, cfg, both);
  out << "done: steps=" << res.steps_done << " loss=" << res.last_loss << " checkpoint="
      << res.checkpoint_path << "\n";
  return res.nan_aborted ? kExitCheckFailure : kExitOk;
}

template <typename Real>
int eval_with(const RunConfig& cfg, const std::string& checkpoint_path, std::ostream& out) {
  Dataset data = Dataset::load((fs::path(cfg.data_dir) / "manifest.csv").string(),
                               cfg.kind() != ModelKind::kAudioOnly, out);
  Model<Real> model(cfg, cfg.seed);
  load_model_checkpoint(model, checkpoint_path);

  fs::create_directories(cfg.out_dir);
  ResultsGrid grid = evaluate_grid(model, data, out);
  const std::string csv_path = (fs::path(cfg.out_dir) / "results.csv").string();
  std::ofstream csv(csv_path);
  csv << grid.to_csv();
  csv.close();
  out << "wrote " << csv_path << "\n";

  // transcripts for the clean condition, one "<id>\t<hypothesis>" per line
  std::vector<std::string> hyps;
  eval_condition(model, data, NoiseKind::kNone, 0.0, &hyps);
  fs::create_directories(fs::path(cfg.out_dir) / "transcripts");
  std::ofstream tsv(fs::path(cfg.out_dir) / "transcripts" / "clean.tsv");
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    tsv << data.utts[i].id << '\t' << hyps[i] << '\n';
  }

  if (cfg.dump_attention && model.kind() == ModelKind::kAvAlign) {
    const fs::path attn_dir = fs::path(cfg.out_dir) / "attn";
    fs::create_directories(attn_dir);
    for (const auto& u : data.utts) {
      NoiseSpec none;
      auto [hyp, alignment] =
          model.transcribe(make_input<Real>(u, model.feature_norm(), none, true));
      std::ofstream f(attn_dir / (u.id + ".csv"));
      f << alignment_to_csv(alignment);
    }
    out << "wrote attention dumps to " << attn_dir.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

std::string run_manifest_text(const RunConfig& cfg, std::uint64_t dataset_hash) {
  std::ostringstream os;
  os << "# resolved run configuration\n" << cfg.to_manifest_text();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(dataset_hash));
  os << "code_version=" << AVALIGN_GIT_REV << "\n";
  os << "dataset_hash=" << hash << "\n";
  return os.str();
}

int cmd_prepare(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const SyntheticSpec spec = synth_spec_from_config(cfg);
  spec.validate();
  const fs::path dir(cfg.data_dir);
  const fs::path stamp = dir / "synth.stamp";
  const std::string want = std::to_string(synth_spec_hash(spec));

  bool synthesized = false;
  std::string have;
  if (fs::exists(stamp)) {
    std::ifstream s(stamp);
    std::getline(s, have);
  }
  if (have != want || !fs::exists(dir / "manifest.csv")) {
    synthesize_corpus(spec, cfg.data_dir);
    std::ofstream s(stamp);
    s << want << "\n";
    synthesized = true;
  }

  const auto entries = read_manifest((dir / "manifest.csv").string());

  // validate transcripts against the vocabulary before any heavy work
  std::string bad;
  for (const auto& e : entries) {
    for (char c : e.transcript) {
      if (!Vocab::instance().contains(c)) {
        bad += " " + e.utterance_id + "('" + std::string(1, c) + "')";
        break;
      }
    }
  }
  if (!bad.empty()) throw DataError("transcripts with out-of-vocabulary symbols:" + bad);

  // feature caches, skipped when newer than their WAV
  const fs::path cache_dir = dir / "cache";
  fs::create_directories(cache_dir);
  double total_s = 0;
  std::set<char> coverage;
  int cached = 0, reused = 0;
  for (const auto& e : entries) {
    Waveform w = resample(read_wav(e.audio_path));
    total_s += w.duration_s();
    for (char c : e.transcript) coverage.insert(c);
    const fs::path feat = cache_dir / (e.utterance_id + ".feat");
    if (fs::exists(feat) && fs::last_write_time(feat) >= fs::last_write_time(e.audio_path)) {
      ++reused;
      continue;
    }
    write_feature_cache(feat.string(), acoustic_features(w));
    ++cached;
  }

  out << "prepared " << entries.size() << " utterances (" << (synthesized ? "synthesized" : "existing")
      << "), total " << total_s << " s audio\n";
  out << "feature caches: " << cached << " computed, " << reused << " reused\n";
  out << "vocab coverage:";
  for (char c : coverage) out << ' ' << c;
  out << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  return cfg.precision == 64 ? train_with<double>(cfg, out) : train_with<float>(cfg, out);
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, std::ostream& out) {
  cfg.validate();
  if (checkpoint_path.empty()) throw ConfigError("eval needs --checkpoint");
  return cfg.precision == 64 ? eval_with<double>(cfg, checkpoint_path, out)
                             : eval_with<float>(cfg, checkpoint_path, out);
}

std::vector<ComponentCheck> run_component_gradchecks(double h, double tol) {
  std::vector<ComponentCheck> checks;
  using D = Tensor<double>;

  {  // convolution block (full-preactivation residual block, stride 2)
    ParamStore<double> ps;
    Rng rng(101);
    auto blk = make_residual_block(ps, "blk", 2, 3, 2, VisualNorm::kInstance, rng);
    D x({1, 6, 6, 2}, true);
    for (auto& v : x.values()) v = rng.normal();
    D w({3, 1});
    for (auto& v : w.values()) v = rng.normal();
    auto fwd = [&](Tape<double>* t) {
      D y = blk.forward(t, x, true);
      return mean_all(t, tanh_op(t, matmul(t, y.view({static_cast<int>(y.numel() / 3), 3}), w)));
    };
    checks.push_back({"conv_block", gradient_check(fwd,
                                                   {&x, &blk.k1, &blk.k2, &blk.k_proj,
                                                    &blk.norm1.gamma, &blk.norm2.beta},
                                                   h, tol)});
  }
  {  // LSTM stack
    ParamStore<double> ps;
    Rng rng(102);
    auto stack = make_lstm_stack(ps, "enc", 3, 4, 2, rng);
    PaddedBatch<double> batch;
    batch.lengths = {3};
    for (int t = 0; t < 3; ++t) {
      D step({1, 3}, true);
      for (auto& v : step.values()) v = rng.normal() * 0.5;
      batch.steps.push_back(step);
    }
    D w({4, 1});
    for (auto& v : w.values()) v = rng.normal();
    auto fwd = [&](Tape<double>* t) {
      auto enc = stack.encode(t, batch);
      return mean_all(t, tanh_op(t, matmul(t, enc.item_memory(t, 0), w)));
    };
    checks.push_back({"lstm_stack",
                      gradient_check(fwd,
                                     {&batch.steps[0], &batch.steps[1], &batch.steps[2],
                                      &stack.layers[0].w, &stack.layers[0].b, &stack.layers[1].w,
                                      &stack.layers[1].b},
                                     h, tol)});
  }
  {  // AV Align fusion layer
    ParamStore<double> ps;
    Rng rng(103);
    const int d = 3;
    auto fl = make_fusion_layer(ps, "fuse", d, d, d, 2, ScoreKind::kAdditive,
                                FusionMix::kCellInput, rng);
    std::vector<D> audio_steps;
    for (int t = 0; t < 4; ++t) {
      D step({1, d}, true);
      for (auto& v : step.values()) v = rng.normal() * 0.5;
      audio_steps.push_back(step);
    }
    D video({2, d}, true);
    for (auto& v : video.values()) v = rng.normal() * 0.5;
    D w({d, 1});
    for (auto& v : w.values()) v = rng.normal();
    auto fwd = [&](Tape<double>* t) {
      auto out = fl.fuse_encode(t, audio_steps, {4}, {video});
      return mean_all(t, tanh_op(t, matmul(t, out.item_memory(t, 0), w)));
    };
    checks.push_back({"fusion_layer",
                      gradient_check(fwd,
                                     {&fl.attn.wq, &fl.attn.wv, &fl.attn.w, &fl.cell.w,
                                      &fl.cell.b, &video, &audio_steps[1]},
                                     h, tol)});
  }
  {  // four-head decoder step (via a one-target teacher-forced loss)
    ParamStore<double> ps;
    Rng rng(104);
    const int hid = 4;
    auto dec = make_decoder(ps, "dec", Vocab::instance().size(), 5, hid, 4, 1, hid, 3, 4 * hid,
                            ScoreKind::kAdditive, rng);
    D memory({3, hid}, true);
    for (auto& v : memory.values()) v = rng.normal() * 0.5;
    D summary({1, 4 * hid}, true);
    for (auto& v : summary.values()) v = rng.normal() * 0.5;
    const std::vector<std::vector<int>> targets = {Vocab::instance().encode("ab")};
    auto fwd = [&](Tape<double>* t) {
      auto mems = std::vector<UtteranceMemories<double>>{dec.prepare(t, {memory})};
      return dec.teacher_forced_loss(t, mems, summary, targets);
    };
    checks.push_back({"decoder_step",
                      gradient_check(fwd,
                                     {&memory, &summary, &dec.embedding, &dec.cell.w, &dec.w_out,
                                      &dec.w_init, &dec.attn[0].heads[0].wq,
                                      &dec.attn[0].heads[2].wv, &dec.attn[0].heads[3].w,
                                      &dec.attn[0].w_proj},
                                     h, tol)});
  }
  return checks;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  (void)cfg;  // gradient checking always runs in 64-bit
  auto checks = run_component_gradchecks();
  bool all_ok = true;
  for (const auto& c : checks) {
    out << c.name << ": " << c.report.str() << "\n";
    all_ok = all_ok && c.report.pass;
  }
  out << (all_ok ? "gradcheck: all components passed\n" : "gradcheck: FAILURES above\n");
  return all_ok ? kExitOk : kExitCheckFailure;
}

int run_command(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  } catch (const DataError& e) {
    err << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
}

}  // namespace ava
