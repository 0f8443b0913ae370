// include/ava/optim.hpp

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
#include <memory>
#include <string>
#include <vector>

#include "ava/tensor.hpp"

namespace ava {

// A named trainable tensor plus its AMSGrad state (first moment m, second
// moment v, and the elementwise running maximum vhat).
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> tensor;
  std::vector<Real> m, v, vhat;

  explicit Parameter(std::string n, Tensor<Real> t)
      : name(std::move(n)), tensor(std::move(t)), m(tensor.numel(), 0), v(tensor.numel(), 0),
        vhat(tensor.numel(), 0) {}
};

struct AmsgradOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Ordered registry of model parameters. Registration order is deterministic
// (models register in construction order), which fixes the clipping and
// checkpoint traversal order.
template <typename Real>
class ParamStore {
 public:
  Tensor<Real>& create(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw StateError("duplicate parameter name: " + name);
    auto p = std::make_shared<Parameter<Real>>(name, Tensor<Real>(std::move(shape), true));
    index_[name] = items_.size();
    items_.push_back(p);
    return p->tensor;
  }

  Parameter<Real>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown parameter: " + name);
    return *items_[it->second];
  }

  const std::vector<std::shared_ptr<Parameter<Real>>>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p->tensor.numel();
    return n;
  }

  void zero_grads() {
    for (auto& p : items_) p->tensor.zero_grad();
  }

  // Global-norm gradient clipping; returns the pre-clip norm.
  double clip_global_norm(double max_norm) {
    double sq = 0;
    for (auto& p : items_) {
      const Real* g = p->tensor.grad_data();
      const std::size_t n = p->tensor.numel();
      for (std::size_t i = 0; i < n; ++i) sq += static_cast<double>(g[i]) * g[i];
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0 && norm > max_norm) {
      const Real s = static_cast<Real>(max_norm / norm);
      for (auto& p : items_) {
        Real* g = const_cast<Real*>(p->tensor.grad_data());
        const std::size_t n = p->tensor.numel();
        for (std::size_t i = 0; i < n; ++i) g[i] *= s;
      }
    }
    return norm;
  }

  // One AMSGrad step over every parameter; gradients are cleared afterward.
  //   m <- b1*m + (1-b1)*g
  //   v <- b2*v + (1-b2)*g^2
  //   vhat <- max(vhat, v)
  //   theta <- theta - lr * m / (sqrt(vhat) + eps)
  void amsgrad_step(const AmsgradOptions& opt) {
    for (auto& p : items_) {
      if (!p->tensor.has_grad()) {
        throw StateError("amsgrad: parameter '" + p->name + "' has no gradient buffer");
      }
    }
    const Real b1 = static_cast<Real>(opt.beta1), b2 = static_cast<Real>(opt.beta2);
    const Real lr = static_cast<Real>(opt.lr), eps = static_cast<Real>(opt.epsilon);
    for (auto& p : items_) {
      Real* th = p->tensor.data();
      Real* g = const_cast<Real*>(p->tensor.grad_data());
      const std::size_t n = p->tensor.numel();
      for (std::size_t i = 0; i < n; ++i) {
        p->m[i] = b1 * p->m[i] + (Real(1) - b1) * g[i];
        p->v[i] = b2 * p->v[i] + (Real(1) - b2) * g[i] * g[i];
        if (p->v[i] > p->vhat[i]) p->vhat[i] = p->v[i];
        th[i] -= lr * p->m[i] / (std::sqrt(p->vhat[i]) + eps);
        g[i] = 0;
      }
    }
    ++step_;
  }

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }

  bool grads_finite() const {
    for (const auto& p : items_) {
      const Real* g = p->tensor.grad_data();
      const std::size_t n = p->tensor.numel();
      for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(static_cast<double>(g[i]))) return false;
    }
    return true;
  }

 private:
  std::vector<std::shared_ptr<Parameter<Real>>> items_;
  std::map<std::string, std::size_t> index_;
  std::int64_t step_ = 0;
};

// Fan-based uniform init, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename Real>
void glorot_init(Tensor<Real>& t, int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.values()) v = static_cast<Real>(rng.uniform(-a, a));
}

}  // namespace ava
