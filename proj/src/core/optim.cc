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

#include "dsgl/core/optim.h"

#include <cmath>

#include "dsgl/core/errors.h"
#include "dsgl/core/random.h"

namespace dsgl {

AdamState MakeAdamState(const std::vector<Tensor>& params, AdamOptions options) {
  AdamState state;
  state.options = options;
  for (const Tensor& p : params) {
    state.m.emplace_back(p.numel(), 0.0);
    state.v.emplace_back(p.numel(), 0.0);
  }
  return state;
}

void AdamStep(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam: state tracks " + std::to_string(state.m.size()) +
                         " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (state.m[p].size() != params[p].numel() ||
        state.v[p].size() != params[p].numel()) {
      throw DimensionError("adam: moment buffers do not match parameter " +
                           std::to_string(p) + " of shape " +
                           ShapeToString(params[p].shape()));
    }
  }
  const AdamOptions& o = state.options;
  state.step += 1;
  const Real t = static_cast<Real>(state.step);
  const Real correction1 = 1.0 - std::pow(o.beta1, t);
  const Real correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto grad = params[p].grad();
    auto data = params[p].mutable_data();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Real g = grad.empty() ? 0.0 : grad[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      const Real m_hat = m[i] / correction1;
      const Real v_hat = v[i] / correction2;
      data[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

Tensor XavierUniform(const Shape& shape, std::uint64_t seed) {
  if (shape.empty()) throw DimensionError("xavier_uniform: shape needs >= 1 axis");
  const std::size_t fan_in = shape[0];
  const std::size_t fan_out = shape.size() > 1 ? shape[1] : shape[0];
  const Real limit = std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
  Rng rng(seed);
  std::vector<Real> data(NumElements(shape));
  for (Real& v : data) v = rng.Uniform(-limit, limit);
  return Tensor(shape, std::move(data), true);
}

}  // namespace dsgl
