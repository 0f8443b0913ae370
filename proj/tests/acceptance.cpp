// tests/acceptance.cpp

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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the binary exits nonzero if any criterion fails. The training criteria
// run real experiments and take tens of minutes total.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include "ava/runner.hpp"
#include "ava/trainer.hpp"

using namespace ava;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Harness {
  int failures = 0;

  void run(int id, const std::string& name, const std::function<bool(std::string&)>& fn) {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s, %.1f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

// ---------------------------------------------------------------------- 1

bool criterion_gradients(std::string& detail) {
  const auto t0 = Clock::now();
  auto checks = run_component_gradchecks(1e-6, 1e-4);
  double worst = 0;
  bool ok = true;
  for (const auto& c : checks) {
    worst = std::max(worst, c.report.max_rel_err);
    ok = ok && c.report.pass;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << checks.size() << " components, max_rel_err=" << worst << ", h=1e-6";
  detail = os.str();
  return ok && secs < 60.0;
}

// ---------------------------------------------------------------------- 2

bool criterion_attention_invariants(std::string& detail) {
  Rng rng(2024);
  double worst_row_err = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int t_a = 1 + static_cast<int>(rng.uniform_int(12));
    const int t_v = 1 + static_cast<int>(rng.uniform_int(12));
    const int d = 2 + static_cast<int>(rng.uniform_int(6));
    ParamStore<double> ps;
    Rng wrng = rng.fork(trial);
    auto attn = make_attention(ps, "a", d, d, 3, ScoreKind::kAdditive, wrng);
    Tensor<double> memory({t_v, d});
    for (auto& v : memory.values()) v = rng.normal();
    Tensor<double> proj = attn.project(nullptr, memory);
    for (int i = 0; i < t_a; ++i) {
      Tensor<double> q({1, d});
      for (auto& v : q.values()) v = rng.normal();
      auto [ctx, alpha] = attn.attend(nullptr, q, memory, proj);
      double sum = 0;
      for (int j = 0; j < t_v; ++j) {
        if (alpha.at(0, j) < 0) return false;
        sum += alpha.at(0, j);
      }
      worst_row_err = std::max(worst_row_err, std::abs(sum - 1.0));
      if (std::abs(sum - 1.0) > 1e-6) return false;
      for (int k = 0; k < d; ++k) {
        double lo = memory.at(0, k), hi = memory.at(0, k);
        for (int j = 0; j < t_v; ++j) {
          lo = std::min(lo, memory.at(j, k));
          hi = std::max(hi, memory.at(j, k));
        }
        if (ctx.at(0, k) < lo - 1e-9 || ctx.at(0, k) > hi + 1e-9) return false;
      }
    }
  }
  std::ostringstream os;
  os << "1000 configurations, worst row-sum error " << worst_row_err;
  detail = os.str();
  return true;
}

// ---------------------------------------------------------------------- 3

bool criterion_shapes(std::string& detail) {
  const auto t0 = Clock::now();
  ParamStore<double> ps;
  Rng rng(3);
  auto fe = make_visual_frontend(ps, "cnn", VisualNorm::kInstance, rng);
  Tensor<double> frame({1, 36, 36, 3});
  for (auto& v : frame.values()) v = rng.uniform();

  Tensor<double> x = rescale_frames<double>(nullptr, frame);
  Tensor<double> y = add_chanvec<double>(nullptr, conv2d<double>(nullptr, x, fe.k_in, 1, 1), fe.b_in);
  const std::vector<std::vector<int>> want = {
      {1, 36, 36, 8}, {1, 36, 36, 8}, {1, 18, 18, 16}, {1, 9, 9, 24}, {1, 5, 5, 32}};
  if (y.shape() != want[0]) return false;
  for (int s = 0; s < 4; ++s) {
    y = fe.blocks[s].forward(nullptr, y, false);
    if (y.shape() != want[s + 1]) return false;
  }
  y = add_chanvec<double>(nullptr, conv2d<double>(nullptr, y, fe.k_out, 1, 0), fe.b_out);
  if (y.shape() != std::vector<int>{1, 1, 1, 128}) return false;

  Waveform w;
  w.sample_rate = kAudioRateHz;
  w.samples.resize(22050);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.4 * std::sin(2 * M_PI * 523.0 * i / kAudioRateHz);
  }
  Tensor<double> feats = acoustic_features(w);
  if (feats.rows() != 98 || feats.cols() != 90) return false;

  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "36x36x8 -> 18x18x16 -> 9x9x24 -> 5x5x32 -> 1x1x128; 22050 samples -> 98x90";
  detail = os.str();
  return secs < 5.0;
}

// ---------------------------------------------------------------------- 4

bool criterion_snr(std::string& detail) {
  Rng rng(4);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Waveform s;
    s.sample_rate = kAudioRateHz;
    s.samples.resize(2205 + rng.uniform_int(8000));
    const double f = rng.uniform(100, 4000), amp = rng.uniform(0.05, 0.7);
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      s.samples[i] = amp * std::sin(2 * M_PI * f * i / kAudioRateHz);
    }
    const NoiseKind kinds[] = {NoiseKind::kWhiteGaussian, NoiseKind::kCafeteria,
                               NoiseKind::kStreet};
    Rng nrng = rng.fork(trial);
    Waveform noise = make_noise(kinds[trial % 3], s.samples.size(), kAudioRateHz, nrng);
    const double want = rng.uniform(-10, 20);
    Waveform mixed = mix_at_snr(s, noise, want);
    Waveform scaled;
    scaled.sample_rate = kAudioRateHz;
    scaled.samples.resize(s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      scaled.samples[i] = mixed.samples[i] - s.samples[i];
    }
    worst = std::max(worst, std::abs(measure_snr_db(s, scaled) - want));
  }
  std::ostringstream os;
  os << "100 mixes, worst |measured - requested| = " << worst << " dB";
  detail = os.str();
  return worst <= 0.1;
}

// ---------------------------------------------------------------------- 5

int lev_oracle(const std::string& a, const std::string& b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  const int sub = lev_oracle(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  const int del = lev_oracle(a.substr(1), b) + 1;
  const int ins = lev_oracle(a, b.substr(1)) + 1;
  return std::min({sub, del, ins});
}

bool criterion_metrics(std::string& detail) {
  Rng rng(5);
  auto random_string = [&](int max_len) {
    const char alphabet[] = "abc ";
    std::string s;
    const int n = static_cast<int>(rng.uniform_int(max_len + 1));
    for (int i = 0; i < n; ++i) s.push_back(alphabet[rng.uniform_int(4)]);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string a = random_string(8), b = random_string(8);
    if (levenshtein(a, b) != lev_oracle(a, b)) return false;
    if (!a.empty()) {
      const double c = cer(a, b);
      if (std::abs(c - 100.0 * lev_oracle(a, b) / a.size()) > 1e-9) return false;
    }
  }
  for (int trial = 0; trial < 300; ++trial) {
    const std::string a = random_string(6), b = random_string(6), c = random_string(6);
    const int ab = levenshtein(a, b);
    if (ab != levenshtein(b, a)) return false;
    if ((ab == 0) != (a == b)) return false;
    if (ab > levenshtein(a, c) + levenshtein(c, b)) return false;
  }
  detail = "1000 pairs vs exhaustive oracle; metric axioms on 300 triples";
  return true;
}

// ---------------------------------------------------------------------- 6

double train_and_score(const RunConfig& base, const std::string& data_dir, std::uint64_t seed,
                       NoiseKind eval_kind, double eval_snr, int max_steps,
                       double* train_seconds = nullptr) {
  RunConfig cfg = base;
  cfg.seed = seed;
  cfg.data_dir = data_dir;
  cfg.max_steps = max_steps;
  Dataset data = Dataset::load((fs::path(data_dir) / "manifest.csv").string(),
                               cfg.kind() != ModelKind::kAudioOnly);
  Model<float> model(cfg, cfg.seed);
  std::ostringstream sink;
  const auto t0 = Clock::now();
  train_model(model, data, cfg, sink);
  if (train_seconds) *train_seconds = seconds_since(t0);
  return eval_condition(model, data, eval_kind, eval_snr).cer;
}

bool criterion_overfit(std::string& detail) {
  const auto t0 = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "ava_accept_c6";
  fs::remove_all(dir);
  SyntheticSpec spec;
  spec.seed = 600;
  spec.n_utterances = 20;
  spec.chars_min = 2;
  spec.chars_max = 4;
  spec.inventory = 12;
  synthesize_corpus(spec, dir.string());
  Dataset data = Dataset::load((dir / "manifest.csv").string(), false);

  RunConfig cfg;
  cfg.model = "a";
  cfg.seed = 600;
  cfg.batch_size = 5;
  cfg.checkpoint_every = 0;
  cfg.log_every = 0;
  cfg.data_dir = dir.string();
  cfg.out_dir = (dir / "run").string();
  Model<float> model(cfg, cfg.seed);
  std::ostringstream sink;

  double cer_now = 100.0;
  int steps = 0;
  while (steps < 2000 && seconds_since(t0) < 540.0) {
    steps += 100;
    RunConfig chunk = cfg;
    chunk.max_steps = steps;
    train_model(model, data, chunk, sink);
    cer_now = eval_condition(model, data, NoiseKind::kNone, 0.0).cer;
    if (cer_now < 5.0) break;
  }
  fs::remove_all(dir);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "CER " << cer_now << "% after " << steps << " steps, " << secs << " s";
  detail = os.str();
  return cer_now < 5.0 && steps <= 2000 && secs < 600.0;
}

// ---------------------------------------------------------------------- 7

bool criterion_fusion_benefit(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "ava_accept_c7";
  fs::remove_all(dir);
  SyntheticSpec spec;
  spec.seed = 700;
  spec.n_utterances = 12;
  spec.chars_min = 2;
  spec.chars_max = 3;
  spec.inventory = 10;
  spec.ambiguity_pairs = {{'b', 'e'}, {'c', 'g'}};
  synthesize_corpus(spec, dir.string());

  RunConfig base;
  base.noise = "wgn";
  base.train_snr_db = 0.0;
  base.batch_size = 6;
  base.checkpoint_every = 0;
  base.log_every = 0;
  base.out_dir = (dir / "run").string();
  const int budget = 300;  // identical step budget for every model and seed
  const std::uint64_t seeds[3] = {701, 702, 703};

  auto median3 = [](std::array<double, 3> v) {
    std::sort(v.begin(), v.end());
    return v[1];
  };

  std::array<double, 3> cer_a{}, cer_align{}, cer_cat{};
  double worst_run_seconds = 0;
  for (int s = 0; s < 3; ++s) {
    for (const std::string& m : {std::string("a"), std::string("av-align"), std::string("av-cat")}) {
      RunConfig cfg = base;
      cfg.model = m;
      double secs = 0;
      const double cer = train_and_score(cfg, dir.string(), seeds[s],
                                         NoiseKind::kWhiteGaussian, 0.0, budget, &secs);
      worst_run_seconds = std::max(worst_run_seconds, secs);
      if (m == "a") cer_a[s] = cer;
      if (m == "av-align") cer_align[s] = cer;
      if (m == "av-cat") cer_cat[s] = cer;
      std::printf("  c7: model=%-8s seed=%llu cer@0dB=%.2f%% (%.0f s)\n", m.c_str(),
                  static_cast<unsigned long long>(seeds[s]), cer, secs);
      std::fflush(stdout);
    }
  }
  fs::remove_all(dir);

  const double med_a = median3(cer_a);
  const double med_align = median3(cer_align);
  const double med_cat = median3(cer_cat);
  std::ostringstream os;
  os << "median CER at 0 dB WGN: av-align=" << med_align << "% vs a=" << med_a
     << "% vs av-cat=" << med_cat << "%, worst run " << worst_run_seconds << " s";
  detail = os.str();
  return med_align < med_a && med_align <= med_cat && worst_run_seconds < 1800.0;
}

// ---------------------------------------------------------------------- 8

bool criterion_frame_rates(std::string& detail) {
  const std::pair<int, int> cases[] = {{30, 9}, {33, 10}, {7, 19}};
  std::ostringstream os;
  for (auto [t_a, t_v] : cases) {
    RunConfig cfg;
    cfg.model = "av-align";
    cfg.enc_units = 8;
    cfg.dec_units = 8;
    cfg.attn_units = 6;
    cfg.char_emb = 5;
    cfg.heads = 2;
    cfg.precision = 64;
    Model<double> model(cfg, 800 + t_a);

    Rng rng(900 + t_a);
    ModelInput<double> item;
    item.audio = Tensor<double>({t_a, kFeatureDim});
    for (auto& v : item.audio.values()) v = rng.normal() * 0.3;
    item.frames = Tensor<double>({t_v, 36, 36, 3});
    for (auto& v : item.frames.values()) v = rng.uniform();
    item.target_ids = Vocab::instance().encode("ok");

    double first_loss = 0, last_loss = 0;
    for (int step = 0; step < 25; ++step) {
      Tape<double> tape;
      ModelForward<double> fwd = model.loss(&tape, {item}, true);
      last_loss = fwd.loss.scalar();
      if (step == 0) {
        first_loss = last_loss;
        // alignment is exactly T_a x T_v: attention, never interpolation
        if (static_cast<int>(fwd.alignments[0].size()) != t_a) return false;
        for (const auto& row : fwd.alignments[0]) {
          if (static_cast<int>(row.size()) != t_v) return false;
        }
      }
      backward(tape, fwd.loss);
      model.params().clip_global_norm(1.0);
      model.params().amsgrad_step({1e-2, 0.9, 0.999, 1e-8});
    }
    auto [hyp, alignment] = model.transcribe(item);
    if (static_cast<int>(alignment.size()) != t_a) return false;
    if (!(last_loss < first_loss) || !std::isfinite(last_loss)) return false;
    os << "T_a=" << t_a << "/T_v=" << t_v << " loss " << first_loss << "->" << last_loss << "; ";
  }
  detail = os.str();
  return true;
}

// ---------------------------------------------------------------------- 9

bool criterion_grid_format(std::string& detail) {
  std::printf(
      "  note: absolute corpus error rates from full-scale training (e.g. 17.70/41.90 clean\n"
      "  CER/WER) are NOT reproducible at desk scale: the original datasets cannot be\n"
      "  redistributed and the compute budget is orders of magnitude smaller. Criteria 1-8\n"
      "  plus this grid-format check stand in for absolute-number reproduction.\n");
  const fs::path dir = fs::temp_directory_path() / "ava_accept_c9";
  fs::remove_all(dir);
  SyntheticSpec spec;
  spec.seed = 900;
  spec.n_utterances = 4;
  spec.chars_min = 2;
  spec.chars_max = 2;
  spec.inventory = 6;
  synthesize_corpus(spec, dir.string());
  Dataset data = Dataset::load((dir / "manifest.csv").string(), false);

  RunConfig cfg;
  cfg.model = "a";
  cfg.enc_units = 8;
  cfg.dec_units = 8;
  cfg.attn_units = 6;
  cfg.char_emb = 5;
  cfg.heads = 2;
  cfg.data_dir = dir.string();
  Model<float> model(cfg, 900);
  std::vector<Tensor<double>> clean;
  for (const auto& u : data.utts) clean.push_back(u.clean_features);
  model.feature_norm().fit(clean);

  std::ostringstream sink;
  ResultsGrid grid = evaluate_grid(model, data, sink);
  fs::remove_all(dir);

  // grid layout: cafe and street carry clean/10/0/-5, wgn omits -5
  int wgn = 0, cafe = 0, street = 0;
  for (const auto& c : grid.cells) {
    if (c.noise == "wgn") {
      ++wgn;
      if (c.snr_db == "-5") return false;
    }
    if (c.noise == "cafe") ++cafe;
    if (c.noise == "street") ++street;
  }
  if (wgn != 3 || cafe != 4 || street != 4) return false;
  grid.validate();  // clean column equality
  ResultsGrid round = ResultsGrid::from_csv(grid.to_csv());
  if (round.to_csv() != grid.to_csv()) return false;
  std::ostringstream os;
  os << "11 cells per model (wgn 3, cafe 4, street 4), clean column equal, CSV round-trips";
  detail = os.str();
  return true;
}

}  // namespace

int main() {
  std::printf("avalign acceptance suite\n");
  Harness h;
  h.run(1, "gradient fidelity (conv block, lstm stack, fusion, decoder; <1e-4, <60 s)",
        criterion_gradients);
  h.run(2, "attention invariants over 1000 random configurations", criterion_attention_invariants);
  h.run(3, "shape contract (architecture table chain; 1 s audio -> 98x90)", criterion_shapes);
  h.run(4, "SNR accuracy within 0.1 dB over 100 mixes", criterion_snr);
  h.run(5, "metric oracle and metric axioms", criterion_metrics);
  h.run(6, "overfit sanity: audio-only CER < 5% on 20 clean utterances", criterion_overfit);
  h.run(7, "fusion benefit at 0 dB WGN (median over 3 seeds)", criterion_fusion_benefit);
  h.run(8, "frame-rate robustness (10:3, 33:10, 7:19) without interpolation",
        criterion_frame_rates);
  h.run(9, "results-grid format stands in for absolute numbers", criterion_grid_format);

  if (h.failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", h.failures);
  return 1;
}
