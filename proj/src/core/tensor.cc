/* Copyright 2026 The DSGL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dsgl/core/tensor.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "dsgl/core/errors.h"

namespace dsgl {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor() : node_(std::make_shared<TensorNode>()) {
  node_->shape = {0};
}

Tensor::Tensor(Shape shape, std::vector<Real> data, bool requires_grad)
    : node_(std::make_shared<TensorNode>()) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("tensor shape " + ShapeToString(shape) +
                         " does not match " + std::to_string(data.size()) +
                         " values");
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  std::vector<Real> data(NumElements(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::Filled(Shape shape, Real value) {
  std::vector<Real> data(NumElements(shape), value);
  return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::Scalar(Real value) { return Tensor({}, {value}); }

Tensor Tensor::Vector(std::vector<Real> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<Real> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + ShapeToString(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::rows() const {
  if (rank() == 0) return 1;
  const std::size_t last = node_->shape.back();
  return last == 0 ? NumElements(Shape(node_->shape.begin(),
                                       node_->shape.end() - 1))
                   : numel() / last;
}

std::size_t Tensor::cols() const {
  return rank() == 0 ? 1 : node_->shape.back();
}

Real Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " +
                         ShapeToString(shape()));
  }
  return node_->data[0];
}

void Tensor::ZeroGrad() { node_->grad.clear(); }

Tensor Tensor::Clone() const {
  return Tensor(node_->shape, node_->data, node_->requires_grad);
}

bool Tensor::AllFinite() const {
  for (Real v : node_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<Real>& GradBuffer(TensorNode& node) {
  if (node.grad.size() != node.data.size()) {
    node.grad.assign(node.data.size(), 0.0);
  }
  return node.grad;
}

void Tape::Record(std::vector<std::shared_ptr<TensorNode>> inputs,
                  std::shared_ptr<TensorNode> output, BackwardFn fn) {
  if (consumed_) {
    throw ContractError("recording on a tape that was already consumed");
  }
  ops_.push_back({std::move(inputs), std::move(output), std::move(fn)});
}

void Tape::Backward(const Tensor& loss) {
  if (consumed_) {
    throw ContractError("backward called twice on the same tape");
  }
  if (loss.numel() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        ShapeToString(loss.shape()));
  }
  consumed_ = true;
  GradBuffer(*loss.node())[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    TensorNode& out = *it->output;
    if (out.grad.empty()) continue;
    it->fn(out.grad);
    // Interior gradients are not needed once propagated.
    std::vector<Real>().swap(out.grad);
  }
}

void Tape::Reset() {
  ops_.clear();
  consumed_ = false;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* ActiveTape() { return g_active_tape; }

Tensor MakeResult(Shape shape, std::vector<Real> data,
                  const std::vector<Tensor>& inputs,
                  const std::function<Tape::BackwardFn(
                      const std::shared_ptr<TensorNode>& out)>& make_backward) {
  Tensor out(std::move(shape), std::move(data));
  Tape* tape = ActiveTape();
  if (tape == nullptr) return out;
  bool needs_grad = false;
  for (const Tensor& t : inputs) needs_grad = needs_grad || t.requires_grad();
  if (!needs_grad) return out;
  out.set_requires_grad(true);
  std::vector<std::shared_ptr<TensorNode>> nodes;
  nodes.reserve(inputs.size());
  for (const Tensor& t : inputs) nodes.push_back(t.node());
  tape->Record(std::move(nodes), out.node(), make_backward(out.node()));
  return out;
}

}  // namespace dsgl
