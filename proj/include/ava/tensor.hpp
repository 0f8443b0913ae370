// include/ava/tensor.hpp

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

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ava/common.hpp"

namespace ava {

template <typename Real>
class Tensor;

// Record of executed differentiable operations. backward() replays the
// recorded adjoints in exact reverse execution order; each contribution
// accumulates additively into the parents' grad buffers.
//
// A tape (and the graph hanging off it) belongs to one model instance and
// one thread at a time; pass nullptr to ops for plain inference.
template <typename Real>
class Tape {
 public:
  void record(std::function<void()> adjoint) { ops_.push_back(std::move(adjoint)); }

  void backward() {
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

// Dense row-major n-d array with an optional same-shape gradient buffer.
// Copies are shallow (storage is shared); ops never write in place.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, bool requires_grad = false)
      : shape_(std::move(shape)), requires_grad_(requires_grad) {
    val_ = std::make_shared<std::vector<Real>>(numel(), Real(0));
    if (requires_grad_) grad_ = std::make_shared<std::vector<Real>>(numel(), Real(0));
  }

  static Tensor from(std::vector<int> shape, std::vector<Real> values, bool requires_grad = false) {
    Tensor t(std::move(shape), requires_grad);
    if (values.size() != t.numel()) {
      throw DimensionError("tensor init: " + std::to_string(values.size()) + " values for shape " +
                           t.shape_str());
    }
    *t.val_ = std::move(values);
    return t;
  }

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    return Tensor(std::move(shape), requires_grad);
  }

  static Tensor full(std::vector<int> shape, Real value, bool requires_grad = false) {
    Tensor t(std::move(shape), requires_grad);
    std::fill(t.val_->begin(), t.val_->end(), value);
    return t;
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape_) n *= static_cast<std::size_t>(d);
    return n;
  }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }

  // 2-d accessors (most of the model lives in matrices)
  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  bool requires_grad() const { return requires_grad_; }
  bool defined() const { return static_cast<bool>(val_); }

  Real* data() { return val_->data(); }
  const Real* data() const { return val_->data(); }
  Real* grad_data() { return grad_ ? grad_->data() : nullptr; }
  const Real* grad_data() const { return grad_ ? grad_->data() : nullptr; }

  std::vector<Real>& values() { return *val_; }
  const std::vector<Real>& values() const { return *val_; }
  bool has_grad() const { return static_cast<bool>(grad_); }
  std::vector<Real>& grad() { return *grad_; }
  const std::vector<Real>& grad() const { return *grad_; }

  Real& at(int i) { return (*val_)[static_cast<std::size_t>(i)]; }
  Real at(int i) const { return (*val_)[static_cast<std::size_t>(i)]; }
  Real& at(int i, int j) { return (*val_)[static_cast<std::size_t>(i) * cols() + j]; }
  Real at(int i, int j) const { return (*val_)[static_cast<std::size_t>(i) * cols() + j]; }

  Real scalar() const {
    if (numel() != 1) throw DimensionError("scalar() on tensor of shape " + shape_str());
    return (*val_)[0];
  }

  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), Real(0));
  }

  // Reinterpret the same storage under a new shape; value and grad buffers
  // are shared, so gradients flow through views without a tape record.
  Tensor view(std::vector<int> new_shape) const {
    std::size_t n = 1;
    for (int d : new_shape) n *= static_cast<std::size_t>(d);
    if (n != numel()) {
      throw DimensionError("view: cannot reshape " + shape_str() + " to requested shape");
    }
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.val_ = val_;
    t.grad_ = grad_;
    t.requires_grad_ = requires_grad_;
    return t;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  bool all_finite() const {
    for (Real v : *val_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    if (grad_)
      for (Real g : *grad_)
        if (!std::isfinite(static_cast<double>(g))) return false;
    return true;
  }

 private:
  std::vector<int> shape_;
  std::shared_ptr<std::vector<Real>> val_;
  std::shared_ptr<std::vector<Real>> grad_;
  bool requires_grad_ = false;
};

// Seed the scalar loss with d(loss)/d(loss) = 1 and run the tape backward.
template <typename Real>
void backward(Tape<Real>& tape, Tensor<Real>& loss) {
  if (loss.numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + loss.shape_str());
  }
  if (!loss.requires_grad()) {
    throw StateError("backward: loss does not require grad (was a tape passed to the ops?)");
  }
  loss.grad()[0] = Real(1);
  tape.backward();
}

}  // namespace ava
