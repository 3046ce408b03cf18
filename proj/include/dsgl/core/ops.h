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

#ifndef DSGL_CORE_OPS_H_
#define DSGL_CORE_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dsgl/core/tensor.h"

// Differentiable operations. Every op evaluates eagerly and, when a tape is
// active and an input requires a gradient, records its backward rule.
// Masks are ordinary tensors holding 0/1 and never receive gradients.
namespace dsgl {

// (m x k) . (k x n) -> (m x n)
Tensor MatMul(const Tensor& a, const Tensor& b);

// Same-shape elementwise sum, or `b` 1-D of extent a.cols() added to every
// row of `a` (bias broadcast).
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
// Same-shape elementwise product.
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, Real factor);

Tensor Sigmoid(const Tensor& x);
Tensor Tanh(const Tensor& x);
Tensor Relu(const Tensor& x);

// Concatenation along `axis`; all other extents must agree.
Tensor Concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor Reshape(const Tensor& x, Shape shape);

Tensor SumAll(const Tensor& x);
// Reductions drop `axis` from the shape.
Tensor SumAxis(const Tensor& x, std::size_t axis);
Tensor MeanAxis(const Tensor& x, std::size_t axis);

// Row lookup into a (V x d) table. Backward scatter-adds into the table, so
// repeated indices accumulate.
Tensor GatherRows(const Tensor& table, std::span<const std::int64_t> indices);

// Softmax along `axis` restricted to entries where mask == 1. Masked entries
// are exactly 0; a slice with no valid entry is all zeros.
Tensor MaskedSoftmax(const Tensor& logits, const Tensor& mask,
                     std::size_t axis);

// Rows (all leading axes flattened) with row_mask == 0 are replaced by exact
// zeros. row_mask.numel() must equal x.rows().
Tensor MaskRows(const Tensor& x, const Tensor& row_mask);

// Mean over the valid positions of each sequence.
// values: (N x L x d), mask: (N x L) -> (N x d). Empty rows give zeros.
Tensor MaskedMean(const Tensor& values, const Tensor& mask);

// Per-head dot products between one query per row and that row's keys.
// query: (N x d), keys: (N x L x d), d divisible by heads -> (N x heads x L).
Tensor HeadScores(const Tensor& query, const Tensor& keys, std::size_t heads);

// Per-head weighted sum of values.
// weights: (N x heads x L), values: (N x L x d) -> (N x d).
Tensor HeadPool(const Tensor& weights, const Tensor& values,
                std::size_t heads);

// Masked GRU over right-aligned sequences, h0 = 0, gate layout [r, z, n]:
//   r = sigmoid(x Wx_r + bx_r + h Wh_r + bh_r)
//   z = sigmoid(x Wx_z + bx_z + h Wh_z + bh_z)
//   n = tanh(x Wx_n + bx_n + r * (h Wh_n + bh_n))
//   h' = (1 - z) * n + z * h
// At a masked step the state is carried unchanged and the emitted output is
// zero. inputs: (N x L x in), mask: (N x L), w_input: (in x 3h),
// w_hidden: (h x 3h), b_input/b_hidden: (3h) -> (N x L x h).
Tensor GruSequence(const Tensor& inputs, const Tensor& mask,
                   const Tensor& w_input, const Tensor& w_hidden,
                   const Tensor& b_input, const Tensor& b_hidden);

enum class Reduction { kMean, kSum };

// Cross-entropy of probabilities against 0/1 labels with p clipped to
// [eps, 1 - eps]. Clipped entries pass no gradient.
Tensor BinaryCrossEntropy(const Tensor& probs, std::span<const Real> labels,
                          Real eps = 1e-7, Reduction reduction = Reduction::kMean);

}  // namespace dsgl

#endif  // DSGL_CORE_OPS_H_
