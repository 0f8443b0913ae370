// include/ava/runner.hpp

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

// The four experiment commands behind the CLI. Each returns a process exit
// code (0 ok, 1 check failure, 2 data error, 3 config error); exceptions are
// mapped by the caller via run_command.

#include <functional>
#include <iostream>
#include <string>

#include "ava/config.hpp"
#include "ava/gradcheck.hpp"

namespace ava {

// Synthesizes/validates the dataset under cfg.data_dir and precomputes
// feature caches; idempotent across reruns.
int cmd_prepare(const RunConfig& cfg, std::ostream& out);

// Trains cfg.model on the prepared dataset; writes checkpoint, training log
// and run manifest under cfg.out_dir.
int cmd_train(const RunConfig& cfg, std::ostream& out);

// Evaluates a checkpoint over the noise/SNR grid; writes results.csv,
// per-condition transcripts, and optional attention dumps.
int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, std::ostream& out);

// Central-difference gradient audits of the four core components
// (convolution block, LSTM stack, fusion layer, decoder step); 64-bit.
int cmd_gradcheck(const RunConfig& cfg, std::ostream& out);

// Per-component reports for gradcheck, reusable from tests.
struct ComponentCheck {
  std::string name;
  GradCheckReport report;
};
std::vector<ComponentCheck> run_component_gradchecks(double h = 1e-6, double tol = 1e-4);

// Exception-to-exit-code mapping shared by main and the tests.
int run_command(const std::function<int()>& fn, std::ostream& err);

// Resolved-config + provenance text written to out_dir/manifest.txt.
std::string run_manifest_text(const RunConfig& cfg, std::uint64_t dataset_hash);

}  // namespace ava
