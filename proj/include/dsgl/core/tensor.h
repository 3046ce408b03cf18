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

#ifndef DSGL_CORE_TENSOR_H_
#define DSGL_CORE_TENSOR_H_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dsgl {

using Real = double;
using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

struct TensorNode {
  Shape shape;
  std::vector<Real> data;
  // Empty until a gradient flows into the node.
  std::vector<Real> grad;
  bool requires_grad = false;
};

// Dense row-major array with value semantics on the handle: copies of a
// Tensor alias the same storage, mirroring how the tape references values.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<Real> data, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Filled(Shape shape, Real value);
  static Tensor Scalar(Real value);
  static Tensor Vector(std::vector<Real> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<Real> values);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node_->data.size(); }
  // Product of all extents but the last; the "row" count used by 2-D kernels.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Real> data() const { return node_->data; }
  std::span<Real> mutable_data() { return node_->data; }
  Real item() const;
  Real operator[](std::size_t flat) const { return node_->data[flat]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient, or an empty span if none was accumulated.
  std::span<const Real> grad() const { return node_->grad; }
  void ZeroGrad();

  // Deep copy detached from any tape.
  Tensor Clone() const;
  bool AllFinite() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }
  bool SameStorage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node);
  std::shared_ptr<TensorNode> node_;
};

// Returns the gradient buffer of `node`, allocating zeros on first use.
std::vector<Real>& GradBuffer(TensorNode& node);

// Records operations for reverse-mode differentiation. One tape per training
// step; a tape is not safe for concurrent mutation.
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const Real> out_grad)>;

  void Record(std::vector<std::shared_ptr<TensorNode>> inputs,
              std::shared_ptr<TensorNode> output, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded rule once in reverse
  // recording order. A second call without Reset() is a ContractError.
  void Backward(const Tensor& loss);
  void Reset();

  std::size_t size() const { return ops_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Op {
    std::vector<std::shared_ptr<TensorNode>> inputs;
    std::shared_ptr<TensorNode> output;
    BackwardFn fn;
  };
  std::vector<Op> ops_;
  bool consumed_ = false;
};

// Installs a tape as the thread's recording target for its lifetime. Ops run
// without an active tape are evaluated but not recorded (inference mode).
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* ActiveTape();

// Output tensor for an op over `inputs`: records `fn` on the active tape when
// any input requires a gradient.
Tensor MakeResult(Shape shape, std::vector<Real> data,
                  const std::vector<Tensor>& inputs,
                  const std::function<Tape::BackwardFn(
                      const std::shared_ptr<TensorNode>& out)>& make_backward);

}  // namespace dsgl

#endif  // DSGL_CORE_TENSOR_H_
