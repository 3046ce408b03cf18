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

#ifndef DSGL_MODEL_PARAMS_H_
#define DSGL_MODEL_PARAMS_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "dsgl/core/tensor.h"

namespace dsgl {

// Named trainable tensors in registration order. The order fixes the
// optimizer state layout and the checkpoint block order.
class ParamStore {
 public:
  // Registers a tensor (marked as requiring gradients). Duplicate names are a
  // ContractError.
  const Tensor& Add(const std::string& name, Tensor value);
  const Tensor& Get(const std::string& name) const;
  bool Contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t NumScalars() const;

  void ZeroGrad();
  // Deep copy of every value, for best-checkpoint snapshots.
  std::vector<std::vector<Real>> Snapshot() const;
  void Restore(const std::vector<std::vector<Real>>& values);
  // Rounds every value to the nearest 32-bit float.
  void RoundToFloat();

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dsgl

#endif  // DSGL_MODEL_PARAMS_H_
