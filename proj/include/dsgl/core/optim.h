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

#ifndef DSGL_CORE_OPTIM_H_
#define DSGL_CORE_OPTIM_H_

#include <cstdint>
#include <vector>

#include "dsgl/core/tensor.h"

namespace dsgl {

struct AdamOptions {
  Real lr = 0.001;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

// First/second moment estimates, one buffer per parameter in registration
// order, and the number of completed steps.
struct AdamState {
  AdamOptions options;
  std::vector<std::vector<Real>> m;
  std::vector<std::vector<Real>> v;
  std::int64_t step = 0;
};

AdamState MakeAdamState(const std::vector<Tensor>& params, AdamOptions options);

// One bias-corrected Adam update using each parameter's accumulated
// gradient; a parameter without a gradient is treated as having zero
// gradient. Throws DimensionError if the state does not match the params.
void AdamStep(std::vector<Tensor>& params, AdamState& state);

// Entries i.i.d. uniform on [-a, a], a = sqrt(6 / (fan_in + fan_out)), where
// fan_in/fan_out are the two leading extents (a 1-D shape uses its length for
// both).
Tensor XavierUniform(const Shape& shape, std::uint64_t seed);

}  // namespace dsgl

#endif  // DSGL_CORE_OPTIM_H_
