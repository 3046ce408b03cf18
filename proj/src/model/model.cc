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

#include "dsgl/model/model.h"

#include <cmath>

#include "dsgl/core/errors.h"
#include "dsgl/core/ops.h"
#include "dsgl/core/optim.h"
#include "dsgl/core/random.h"

namespace dsgl {

namespace {

const char* AdapterName(Side side) { return side == Side::kUser ? "adapter.user" : "adapter.item"; }

Tensor MaskTensor(std::span<const std::uint8_t> valid, Shape shape) {
  std::vector<Real> m(valid.begin(), valid.end());
  return Tensor(std::move(shape), std::move(m));
}

// Width of the encoder input for layer k when the children sit on `child`.
std::size_t EncoderInput(const ModelConfig& c, Side child, std::size_t layer) {
  return layer == 1 ? c.embed_dim(child) : c.hidden + c.d_time;
}

// Layers needed per kind of central node: user centrals go up to K_u, item
// centrals (the candidate item and items inside the user tree) to K_u - 1.
std::size_t LayersFor(const ModelConfig& c, Side central) {
  return central == Side::kUser ? c.user_depth() : c.user_depth() - 1;
}

void CheckTree(const DsgTree& tree, const std::vector<std::size_t>& fanouts, const char* name) {
  if (tree.levels.size() < fanouts.size()) {
    throw ContractError(std::string(name) + " tree has " + std::to_string(tree.levels.size()) +
                        " levels, model needs " + std::to_string(fanouts.size()));
  }
  for (std::size_t k = 0; k < fanouts.size(); ++k) {
    if (tree.levels[k].fanout != fanouts[k]) {
      throw ContractError(std::string(name) + " tree level " + std::to_string(k + 1) +
                          " has fanout " + std::to_string(tree.levels[k].fanout) +
                          ", model expects " + std::to_string(fanouts[k]));
    }
  }
}

}  // namespace

std::string ConvPrefix(Side central, std::size_t layer) {
  return std::string("conv.") + SideName(central) + "." + std::to_string(layer) + ".";
}

ConvParams GetConvParams(const ParamStore& params, Side central, std::size_t layer) {
  const std::string p = ConvPrefix(central, layer);
  return {params.Get(p + "gru.w_input"), params.Get(p + "gru.w_hidden"),
          params.Get(p + "gru.b_input"), params.Get(p + "gru.b_hidden"),
          params.Get(p + "skip"),        params.Get(p + "att.wq_pref"),
          params.Get(p + "att.wq_target"), params.Get(p + "att.wk"),
          params.Get(p + "att.wv"),      params.Get(p + "att.wo")};
}

ParamStore InitParams(const ModelConfig& c) {
  ValidateModelConfig(c);
  ParamStore store;
  std::uint64_t stream = 0;
  const auto xavier = [&](const std::string& name, Shape shape) {
    store.Add(name, XavierUniform(shape, DeriveSeed(c.seed, stream++)));
  };
  const auto zeros = [&](const std::string& name, Shape shape) {
    ++stream;
    store.Add(name, Tensor::Zeros(std::move(shape)));
  };
  const auto u = static_cast<std::size_t>(c.num_users);
  const auto i = static_cast<std::size_t>(c.num_items);
  const auto cat = static_cast<std::size_t>(c.num_categories);
  xavier("emb.user", {u, c.d_user});
  xavier("emb.item", {i, c.d_item});
  xavier("emb.cat", {cat, c.d_cat});
  xavier("emb.time", {c.num_time_buckets, c.d_time});
  xavier(AdapterName(Side::kUser), {c.embed_dim(Side::kUser), c.hidden});
  xavier(AdapterName(Side::kItem), {c.embed_dim(Side::kItem), c.hidden});
  const std::size_t h = c.hidden;
  for (Side central : {Side::kUser, Side::kItem}) {
    for (std::size_t k = 1; k <= LayersFor(c, central); ++k) {
      const std::string p = ConvPrefix(central, k);
      const std::size_t in = EncoderInput(c, Opposite(central), k);
      xavier(p + "gru.w_input", {in, 3 * h});
      xavier(p + "gru.w_hidden", {h, 3 * h});
      zeros(p + "gru.b_input", {3 * h});
      zeros(p + "gru.b_hidden", {3 * h});
      xavier(p + "skip", {in, h});
      xavier(p + "att.wq_pref", {h, h});
      xavier(p + "att.wq_target", {h, h});
      xavier(p + "att.wk", {h, h});
      xavier(p + "att.wv", {h, h});
      xavier(p + "att.wo", {h, h});
    }
  }
  std::size_t width = c.embed_dim(Side::kUser) + c.embed_dim(Side::kItem) + 2 * h;
  std::vector<std::size_t> widths = c.mlp_hidden;
  widths.push_back(1);
  for (std::size_t j = 0; j < widths.size(); ++j) {
    xavier("mlp." + std::to_string(j) + ".w", {width, widths[j]});
    zeros("mlp." + std::to_string(j) + ".b", {widths[j]});
    width = widths[j];
  }
  return store;
}

NodeEmbedding EmbedNodes(const ParamStore& params, const ModelConfig& c, Side side,
                         std::span<const std::int64_t> ids,
                         std::span<const std::int64_t> categories,
                         std::span<const std::int64_t> deltas, const Tensor& mask) {
  const std::size_t n = ids.size();
  if (deltas.size() != n || mask.numel() != n ||
      (side == Side::kItem && categories.size() != n)) {
    throw DimensionError("embed_nodes: ids, categories, deltas and mask must have equal length");
  }
  Tensor time;
  if (c.ablation.drop_time()) {
    time = Tensor::Zeros({n, c.d_time});
  } else {
    std::vector<std::int64_t> buckets(n);
    for (std::size_t k = 0; k < n; ++k) {
      buckets[k] = static_cast<std::int64_t>(TimeBucket(deltas[k], c.time_base, c.num_time_buckets));
    }
    time = MaskRows(GatherRows(params.Get("emb.time"), buckets), mask);
  }
  std::vector<Tensor> parts;
  if (side == Side::kUser) {
    parts.push_back(GatherRows(params.Get("emb.user"), ids));
  } else {
    parts.push_back(GatherRows(params.Get("emb.item"), ids));
    parts.push_back(GatherRows(params.Get("emb.cat"), categories));
  }
  parts.push_back(time);
  return {MaskRows(Concat(parts, 1), mask), time};
}

Tensor EncodeSequence(const ConvParams& p, const Ablation& ablation, const Tensor& inputs,
                      const Tensor& mask) {
  if (inputs.rank() != 3) {
    throw DimensionError("encode_sequence expects (N x L x in), got " + ShapeToString(inputs.shape()));
  }
  const std::size_t n = inputs.dim(0), len = inputs.dim(1), in = inputs.dim(2);
  if (ablation.skip_encoder()) {
    if (p.skip.dim(0) != in) {
      throw DimensionError("encode_sequence: input width " + std::to_string(in) +
                           " vs projection " + ShapeToString(p.skip.shape()));
    }
    // Padded inputs are zero rows and the map has no bias, so they stay zero.
    const Tensor flat = MatMul(Reshape(inputs, {n * len, in}), p.skip);
    return Reshape(flat, {n, len, p.skip.dim(1)});
  }
  return GruSequence(inputs, mask, p.gru_w_input, p.gru_w_hidden, p.gru_b_input, p.gru_b_hidden);
}

Tensor DualAttention(const ConvParams& p, const ModelConfig& c, const Tensor& hidden,
                     const Tensor& mask, const Tensor& q_pref, const Tensor& q_target,
                     AttentionWeights* weights) {
  if (hidden.rank() != 3 || mask.rank() != 2 || mask.dim(0) != hidden.dim(0) ||
      mask.dim(1) != hidden.dim(1)) {
    throw DimensionError("dual_attention: hidden " + ShapeToString(hidden.shape()) + " vs mask " +
                         ShapeToString(mask.shape()));
  }
  const Ablation& a = c.ablation;
  if (a.no_att) return MaskedMean(hidden, mask);
  if (a.no_taatt && a.no_paatt) {
    throw ContractError("dual attention needs at least one of the two query branches");
  }
  const std::size_t n = hidden.dim(0), len = hidden.dim(1), h = hidden.dim(2);
  const std::size_t heads = c.heads;
  const Tensor flat = Reshape(hidden, {n * len, h});
  const Tensor keys = Reshape(MatMul(flat, p.wk), {n, len, h});
  const Tensor values = Reshape(MatMul(flat, p.wv), {n, len, h});
  std::vector<Real> m3(n * heads * len);
  const auto m = mask.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t hd = 0; hd < heads; ++hd) {
      std::copy_n(m.begin() + r * len, len, m3.begin() + (r * heads + hd) * len);
    }
  }
  const Tensor mask3({n, heads, len}, std::move(m3));
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(h / heads));

  const auto branch = [&](const Tensor& query, const Tensor& wq, Tensor* record) {
    Tensor scores = HeadScores(MatMul(query, wq), keys, heads);
    if (!c.attn_scale_outside) scores = Scale(scores, scale);
    Tensor w = MaskedSoftmax(scores, mask3, 2);
    if (record) *record = w;
    if (c.attn_scale_outside) w = Scale(w, scale);
    return HeadPool(w, values, heads);
  };
  Tensor pooled;
  bool have = false;
  if (!a.no_paatt) {
    pooled = branch(q_pref, p.wq_pref, weights ? &weights->preference : nullptr);
    have = true;
  }
  if (!a.no_taatt) {
    Tensor t = branch(q_target, p.wq_target, weights ? &weights->target : nullptr);
    pooled = have ? Add(pooled, t) : t;
  }
  return MatMul(pooled, p.wo);
}

Tensor LayerCombine(const std::vector<Tensor>& layers, bool no_lc) {
  if (layers.empty()) throw ContractError("layer_combine needs at least one layer");
  if (no_lc) return layers.back();
  Tensor total = layers[0];
  for (std::size_t k = 1; k < layers.size(); ++k) total = Add(total, layers[k]);
  return Scale(total, 1.0 / static_cast<Real>(layers.size()));
}

Tensor PredictProbs(const ParamStore& params, const ModelConfig& c, const Tensor& e_user,
                    const Tensor& e_item, const Tensor& x_user, const Tensor& x_item) {
  Tensor z = Concat({e_user, e_item, x_user, x_item}, 1);
  const std::size_t layers = c.mlp_hidden.size() + 1;
  for (std::size_t j = 0; j < layers; ++j) {
    const std::string p = "mlp." + std::to_string(j) + ".";
    z = Add(MatMul(z, params.Get(p + "w")), params.Get(p + "b"));
    if (j + 1 < layers) z = Relu(z);
  }
  return Reshape(Sigmoid(z), {z.dim(0)});
}

DsglModel::DsglModel(ModelConfig config) : config_(std::move(config)), params_(InitParams(config_)) {}

DsglModel::DsglModel(ModelConfig config, ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  ValidateModelConfig(config_);
}

namespace {

struct TreeInput {
  const DsgTree* tree;
  std::size_t depth;
  std::vector<std::size_t> fanouts;
  NodeEmbedding root;
  Tensor root_target_query;  // adapted embedding of the other root
};

std::vector<Tensor> ConvolveTree(const ParamStore& params, const ModelConfig& c,
                                 const TreeInput& in, std::size_t batch,
                                 std::vector<AttentionRecord>* records) {
  const std::size_t depth = in.depth;
  if (depth == 0) return {};
  const DsgTree& tree = *in.tree;
  std::vector<Side> side(depth + 1);
  std::vector<std::size_t> count(depth + 1);
  std::vector<NodeEmbedding> emb(depth + 1);
  std::vector<Tensor> mask(depth + 1);
  side[0] = tree.root_side;
  count[0] = batch;
  emb[0] = in.root;
  mask[0] = Tensor::Filled({batch}, 1.0);
  for (std::size_t d = 1; d <= depth; ++d) {
    const DsgLevel& level = tree.levels[d - 1];
    side[d] = level.side;
    count[d] = level.size();
    mask[d] = MaskTensor(level.valid, {count[d]});
    emb[d] = EmbedNodes(params, c, side[d], level.ids, level.categories, level.deltas, mask[d]);
  }
  // Preference queries of central nodes and target queries from their parents.
  std::vector<Tensor> q_pref(depth), q_target(depth);
  for (std::size_t d = 0; d < depth; ++d) {
    q_pref[d] = MatMul(emb[d].e, params.Get(AdapterName(side[d])));
  }
  q_target[0] = in.root_target_query;
  for (std::size_t d = 1; d < depth; ++d) {
    const std::size_t m = in.fanouts[d - 1];
    std::vector<std::int64_t> parent(count[d]);
    for (std::size_t s = 0; s < count[d]; ++s) parent[s] = static_cast<std::int64_t>(s / m);
    q_target[d] = GatherRows(q_pref[d - 1], parent);
  }

  // x[d] holds the latest layer for depth d; time[d] the time slice.
  std::vector<Tensor> x(depth + 1);
  for (std::size_t d = 0; d <= depth; ++d) x[d] = emb[d].e;
  std::vector<Tensor> root_layers;
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<Tensor> next(depth + 1 - k);
    for (std::size_t d = 0; d + k <= depth; ++d) {
      const std::size_t m = in.fanouts[d];
      const std::size_t n = count[d];
      const Tensor child = k == 1 ? x[d + 1] : Concat({x[d + 1], emb[d + 1].time}, 1);
      const std::size_t width = child.cols();
      const Tensor seq = Reshape(child, {n, m, width});
      const Tensor seq_mask = Reshape(mask[d + 1], {n, m});
      const ConvParams p = GetConvParams(params, side[d], k);
      const Tensor hidden = EncodeSequence(p, c.ablation, seq, seq_mask);
      AttentionRecord rec{tree.root_side, d, k, {}, seq_mask};
      next[d] = DualAttention(p, c, hidden, seq_mask, q_pref[d], q_target[d],
                              records ? &rec.weights : nullptr);
      if (records) records->push_back(std::move(rec));
    }
    for (std::size_t d = 0; d + k <= depth; ++d) x[d] = next[d];
    root_layers.push_back(x[0]);
  }
  return root_layers;
}

}  // namespace

ForwardOutput DsglModel::Forward(const DsgBatch& batch, bool record_attention) const {
  const ModelConfig& c = config_;
  CheckTree(batch.user_tree, c.dsg.user_fanouts, "user");
  CheckTree(batch.item_tree, c.dsg.item_fanouts, "item");
  if (batch.batch == 0) throw ContractError("forward on an empty batch");
  const std::size_t b = batch.batch;
  const std::vector<std::int64_t> zero_delta(b, 0);
  const Tensor ones = Tensor::Filled({b}, 1.0);

  ForwardOutput out;
  const NodeEmbedding user_root =
      EmbedNodes(params_, c, Side::kUser, batch.user_ids, {}, zero_delta, ones);
  const NodeEmbedding item_root = EmbedNodes(params_, c, Side::kItem, batch.item_ids,
                                             batch.item_categories, zero_delta, ones);
  out.e_user = user_root.e;
  out.e_item = item_root.e;
  const Tensor user_query = MatMul(user_root.e, params_.Get(AdapterName(Side::kUser)));
  const Tensor item_query = MatMul(item_root.e, params_.Get(AdapterName(Side::kItem)));

  std::vector<AttentionRecord>* records = record_attention ? &out.attention : nullptr;
  out.user_layers = ConvolveTree(
      params_, c, {&batch.user_tree, c.user_depth(), c.dsg.user_fanouts, user_root, item_query},
      b, records);
  out.item_layers = ConvolveTree(
      params_, c, {&batch.item_tree, c.item_depth(), c.dsg.item_fanouts, item_root, user_query},
      b, records);
  out.x_user = LayerCombine(out.user_layers, c.ablation.no_lc);
  out.x_item = out.item_layers.empty() ? Tensor::Zeros({b, c.hidden})
                                       : LayerCombine(out.item_layers, c.ablation.no_lc);
  out.probs = PredictProbs(params_, c, out.e_user, out.e_item, out.x_user, out.x_item);
  return out;
}

Tensor DsglModel::Loss(const Tensor& probs, std::span<const Real> labels) const {
  return BinaryCrossEntropy(probs, labels, 1e-7, config_.loss_reduction);
}

}  // namespace dsgl
