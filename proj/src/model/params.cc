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

#include "dsgl/model/params.h"

#include <algorithm>

#include "dsgl/core/errors.h"

namespace dsgl {

const Tensor& ParamStore::Add(const std::string& name, Tensor value) {
  if (Contains(name)) throw ContractError("parameter '" + name + "' registered twice");
  value.set_requires_grad(true);
  index_.emplace(name, tensors_.size());
  names_.push_back(name);
  tensors_.push_back(std::move(value));
  return tensors_.back();
}

const Tensor& ParamStore::Get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter named '" + name + "'");
  return tensors_[it->second];
}

std::size_t ParamStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.numel();
  return n;
}

void ParamStore::ZeroGrad() {
  for (auto& t : tensors_) t.ZeroGrad();
}

std::vector<std::vector<Real>> ParamStore::Snapshot() const {
  std::vector<std::vector<Real>> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

void ParamStore::Restore(const std::vector<std::vector<Real>>& values) {
  if (values.size() != tensors_.size()) {
    throw DimensionError("snapshot holds " + std::to_string(values.size()) +
                         " tensors, store has " + std::to_string(tensors_.size()));
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    auto dst = tensors_[k].mutable_data();
    if (dst.size() != values[k].size()) {
      throw DimensionError("snapshot size mismatch for '" + names_[k] + "'");
    }
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

void ParamStore::RoundToFloat() {
  for (auto& t : tensors_) {
    for (Real& v : t.mutable_data()) v = static_cast<Real>(static_cast<float>(v));
  }
}

}  // namespace dsgl
