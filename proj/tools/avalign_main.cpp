// tools/avalign_main.cpp

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

// avalign: audio-visual speech recognition experiments on synthetic or
// prepared data. Subcommands: prepare, train, eval, gradcheck.

#include <CLI11.hpp>
#include <iostream>

#include "ava/runner.hpp"

using namespace ava;

int main(int argc, char** argv) {
  CLI::App app{"attention-based audio-visual speech recognition experiments"};
  app.require_subcommand(1);

  std::string config_path, model, noise, snr_list, out_dir, checkpoint, set_kv;
  std::vector<std::string> overrides;
  long long seed = -1;
  int precision = 0;
  bool dump_attention = false, train_clean = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--model", model, "a | av-align | av-cat");
    cmd->add_option("--noise", noise, "none | wgn | cafe | street");
    cmd->add_option("--snr-db", snr_list,
                    "comma-separated dB list for evaluation; the first value "
                    "is the matched training SNR");
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--precision", precision, "32 or 64");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--dump-attention", dump_attention, "write alignment CSVs (av-align)");
    cmd->add_flag("--train-clean-eval-noisy", train_clean,
                  "train on clean audio even when a noise kind is set");
    cmd->add_option("--set", overrides, "extra key=value overrides")->take_all();
  };

  CLI::App* prepare = app.add_subcommand("prepare", "synthesize/validate the dataset and caches");
  CLI::App* train = app.add_subcommand("train", "train one model variant");
  CLI::App* eval = app.add_subcommand("eval", "noise-sweep evaluation of a checkpoint");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  for (CLI::App* cmd : {prepare, train, eval, gradcheck}) add_common(cmd);
  eval->add_option("--checkpoint", checkpoint, "checkpoint to evaluate")->required();

  CLI11_PARSE(app, argc, argv);

  return run_command(
      [&]() -> int {
        RunConfig cfg =
            config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
        if (!model.empty()) cfg.model = model;
        if (!noise.empty()) cfg.noise = noise;
        if (!snr_list.empty()) {
          cfg.eval_snr_db = parse_double_list(snr_list);
          if (!cfg.eval_snr_db.empty()) cfg.train_snr_db = cfg.eval_snr_db.front();
        }
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (precision != 0) cfg.precision = precision;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (dump_attention) cfg.dump_attention = true;
        if (train_clean) cfg.train_clean_eval_noisy = true;
        for (const auto& kv : overrides) cfg.apply_override(kv);

        if (prepare->parsed()) return cmd_prepare(cfg, std::cout);
        if (train->parsed()) return cmd_train(cfg, std::cout);
        if (eval->parsed()) return cmd_eval(cfg, checkpoint, std::cout);
        return cmd_gradcheck(cfg, std::cout);
      },
      std::cerr);
}
