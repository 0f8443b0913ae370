// include/ava/gradcheck.hpp

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

// Central-difference gradient checking (64-bit only). The finite-difference
// side is the independent oracle: it re-runs the caller's forward with no
// tape attached, so it cannot share an adjoint with the path it checks.

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ava/tensor.hpp"

namespace ava {

struct GradCheckReport {
  double max_rel_err = 0.0;
  double h = 0.0;
  double tol = 0.0;
  std::string worst;  // "tensor#k[i]" of the worst coordinate
  bool pass = false;

  std::string str() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << "  max_rel_err=" << max_rel_err << "  h=" << h
       << "  tol=" << tol;
    if (!worst.empty()) os << "  worst=" << worst;
    return os.str();
  }
};

// `forward` must build a fresh graph on the given tape (nullptr for the
// finite-difference probes) and return the scalar loss tensor. `leaves` are
// the tensors to differentiate with respect to; they must require grad and
// be the same objects the closure reads. For large leaves,
// `max_coords_per_leaf` limits the probes to an evenly strided coordinate
// subset (0 checks everything).
inline GradCheckReport gradient_check(
    const std::function<Tensor<double>(Tape<double>*)>& forward,
    const std::vector<Tensor<double>*>& leaves, double h = 1e-5, double tol = 1e-4,
    int max_coords_per_leaf = 0) {
  GradCheckReport rep;
  rep.h = h;
  rep.tol = tol;

  for (Tensor<double>* t : leaves) {
    if (!t->requires_grad() || !t->has_grad()) {
      throw std::invalid_argument("gradient_check: leaf does not require grad");
    }
    t->zero_grad();
  }

  Tape<double> tape;
  Tensor<double> loss = forward(&tape);
  if (loss.numel() != 1) {
    throw std::invalid_argument("gradient_check: function output must be scalar, got " +
                                loss.shape_str());
  }
  backward(tape, loss);

  std::vector<std::vector<double>> analytic;
  double max_abs = 0.0;
  for (const Tensor<double>* t : leaves) {
    analytic.push_back(t->grad());
    for (double g : analytic.back()) max_abs = std::max(max_abs, std::abs(g));
  }

  // Relative error with a scale guard: coordinates much smaller than the
  // gradient's overall magnitude are compared against that scale, not
  // against themselves, so FD roundoff on negligible entries cannot fail
  // the check.
  const double guard = std::max(1e-2 * max_abs, 1e-8);
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    Tensor<double>* t = leaves[k];
    std::vector<std::size_t> coords;
    if (max_coords_per_leaf > 0 && t->numel() > static_cast<std::size_t>(max_coords_per_leaf)) {
      for (int s = 0; s < max_coords_per_leaf; ++s) {
        coords.push_back(s * t->numel() / max_coords_per_leaf);
      }
    } else {
      coords.resize(t->numel());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    }
    for (std::size_t i : coords) {
      const double orig = t->values()[i];
      t->values()[i] = orig + h;
      const double fp = forward(nullptr).scalar();
      t->values()[i] = orig - h;
      const double fm = forward(nullptr).scalar();
      t->values()[i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = analytic[k][i];
      const double denom = std::max({std::abs(an), std::abs(fd), guard});
      const double rel = std::abs(an - fd) / denom;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst = "tensor#" + std::to_string(k) + "[" + std::to_string(i) + "]";
      }
    }
  }
  rep.pass = rep.max_rel_err < tol;
  return rep;
}

}  // namespace ava
