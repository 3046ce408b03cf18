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

#ifndef DSGL_TESTS_SUPPORT_GRADCHECK_H_
#define DSGL_TESTS_SUPPORT_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dsgl/core/tensor.h"

namespace dsgl::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<leaf>[<index>] analytic=<a> numeric=<n>"
  std::size_t checked = 0;
};

// Relative error with a floor on the denominator so that entries whose true
// derivative is ~0 are judged on an absolute scale.
inline double RelError(double analytic, double numeric, double floor = 1e-3) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Compares tape gradients of `loss_fn` against central finite differences
// for every entry of every leaf. `loss_fn` must rebuild the graph from the
// leaves' current values on each call.
inline GradCheckResult CheckGradients(
    const std::vector<Tensor>& leaves,
    const std::function<Tensor()>& loss_fn, double h = 1e-5,
    const std::vector<std::string>& names = {}) {
  for (Tensor leaf : leaves) {
    leaf.ZeroGrad();
    leaf.set_requires_grad(true);
  }
  {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = loss_fn();
    }
    tape.Backward(loss);
  }
  GradCheckResult result;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    Tensor leaf = leaves[l];
    const std::vector<Real> analytic =
        leaf.has_grad() ? std::vector<Real>(leaf.grad().begin(), leaf.grad().end())
                        : std::vector<Real>(leaf.numel(), 0.0);
    auto data = leaf.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Real saved = data[i];
      data[i] = saved + h;
      const Real up = loss_fn().item();
      data[i] = saved - h;
      const Real down = loss_fn().item();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = RelError(analytic[i], numeric);
      ++result.checked;
      if (err > result.max_rel_error || result.worst.empty()) {
        if (err >= result.max_rel_error) {
          result.max_rel_error = err;
          const std::string name = l < names.size() ? names[l] : std::to_string(l);
          result.worst = name + "[" + std::to_string(i) + "] analytic=" +
                         std::to_string(analytic[i]) +
                         " numeric=" + std::to_string(numeric);
        }
      }
    }
  }
  return result;
}

}  // namespace dsgl::testing

#endif  // DSGL_TESTS_SUPPORT_GRADCHECK_H_
