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

#ifndef DSGL_MODEL_MODEL_H_
#define DSGL_MODEL_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "dsgl/core/tensor.h"
#include "dsgl/graph/dsg.h"
#include "dsgl/model/config.h"
#include "dsgl/model/params.h"

namespace dsgl {

// Weights of one graph-convolution layer for one kind of central node.
struct ConvParams {
  Tensor gru_w_input;   // in x 3h
  Tensor gru_w_hidden;  // h x 3h
  Tensor gru_b_input;   // 3h
  Tensor gru_b_hidden;  // 3h
  Tensor skip;          // in x h, used when the encoder is ablated
  Tensor wq_pref;       // h x h
  Tensor wq_target;     // h x h
  Tensor wk;            // h x h
  Tensor wv;            // h x h
  Tensor wo;            // h x h
};

// Name prefix of the layer-k parameters for central nodes on `side`.
std::string ConvPrefix(Side central, std::size_t layer);
ConvParams GetConvParams(const ParamStore& params, Side central, std::size_t layer);

// Registers every parameter of the network, Xavier-initialized from
// config.seed (biases start at zero).
ParamStore InitParams(const ModelConfig& config);

// Zero-layer node embeddings and their time-decay slice.
struct NodeEmbedding {
  Tensor e;     // n x embed_dim(side)
  Tensor time;  // n x d_time
};

// Looks up [E_user; E_time] or [E_item; E_cat; E_time] for n nodes. Rows whose
// mask is 0 are exact zeros; with the time ablation the time slice is zero.
NodeEmbedding EmbedNodes(const ParamStore& params, const ModelConfig& config, Side side,
                         std::span<const std::int64_t> ids,
                         std::span<const std::int64_t> categories,
                         std::span<const std::int64_t> deltas, const Tensor& mask);

// Recurrent encoding of right-aligned sequences: (N x L x in) -> (N x L x h).
// With the encoder ablated, a linear projection of the inputs instead.
Tensor EncodeSequence(const ConvParams& p, const Ablation& ablation, const Tensor& inputs,
                      const Tensor& mask);

// Attention weights of one branch, (N x heads x L).
struct AttentionWeights {
  Tensor preference;
  Tensor target;
};

// Sum of preference- and target-queried multi-head attention pooling over
// `hidden` (N x L x h) with shared key/value/output maps. Queries are
// (N x h). With no_att, the masked mean of `hidden`.
Tensor DualAttention(const ConvParams& p, const ModelConfig& config, const Tensor& hidden,
                     const Tensor& mask, const Tensor& q_pref, const Tensor& q_target,
                     AttentionWeights* weights = nullptr);

// Mean of the per-layer root vectors, or the last one with no_lc.
Tensor LayerCombine(const std::vector<Tensor>& layers, bool no_lc);

// MLP over [e_u; e_i; x_u; x_i] (B rows each), returning probabilities (B).
Tensor PredictProbs(const ParamStore& params, const ModelConfig& config, const Tensor& e_user,
                    const Tensor& e_item, const Tensor& x_user, const Tensor& x_item);

struct AttentionRecord {
  Side tree;
  std::size_t depth;  // depth of the central nodes
  std::size_t layer;
  AttentionWeights weights;
  Tensor mask;  // (N x L)
};

struct ForwardOutput {
  Tensor probs;                      // (B)
  std::vector<Tensor> user_layers;   // K_u tensors, B x h
  std::vector<Tensor> item_layers;   // K_i tensors, B x h
  Tensor x_user;                     // combined, B x h
  Tensor x_item;
  Tensor e_user;
  Tensor e_item;
  std::vector<AttentionRecord> attention;  // only when requested
};

class DsglModel {
 public:
  explicit DsglModel(ModelConfig config);
  DsglModel(ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Bottom-up convolution over both trees and the prediction head. The batch
  // must carry at least the configured depths with matching fanouts; deeper
  // levels are ignored.
  ForwardOutput Forward(const DsgBatch& batch, bool record_attention = false) const;
  Tensor Predict(const DsgBatch& batch) const { return Forward(batch).probs; }
  Tensor Loss(const Tensor& probs, std::span<const Real> labels) const;

 private:
  ModelConfig config_;
  ParamStore params_;
};

}  // namespace dsgl

#endif  // DSGL_MODEL_MODEL_H_
