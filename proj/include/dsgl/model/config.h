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

#ifndef DSGL_MODEL_CONFIG_H_
#define DSGL_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dsgl/core/ops.h"
#include "dsgl/graph/dsg.h"

namespace dsgl {

// Switches that remove one component of the network.
struct Ablation {
  bool no_time = false;     // zero every time-decay embedding
  bool no_seq_enc = false;  // replace the recurrent encoder by a linear map
  bool no_tase = false;     // both of the above
  bool no_att = false;      // masked mean instead of attention pooling
  bool no_taatt = false;    // drop the target-aware branch
  bool no_paatt = false;    // drop the preference-aware branch
  bool no_lc = false;       // last layer instead of the layer mean

  bool drop_time() const { return no_time || no_tase; }
  bool skip_encoder() const { return no_seq_enc || no_tase; }

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

// Applies a flag by name ("no_time", ...). Several may be joined with '+'.
// Throws ValueError for unknown names.
void ApplyAblation(Ablation& ablation, const std::string& names);
std::string AblationToString(const Ablation& ablation);

struct ModelConfig {
  std::int64_t num_users = 1;
  std::int64_t num_items = 1;
  std::int64_t num_categories = 1;

  std::size_t d_user = 64;
  std::size_t d_item = 32;
  std::size_t d_cat = 32;
  std::size_t d_time = 32;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::vector<std::size_t> mlp_hidden = {256, 128};
  std::int64_t time_base = 2;
  std::size_t num_time_buckets = 40;

  DsgSpec dsg;
  Ablation ablation;
  bool attn_scale_outside = false;
  Reduction loss_reduction = Reduction::kMean;
  std::uint64_t seed = 1;

  std::size_t user_depth() const { return dsg.user_depth(); }
  std::size_t item_depth() const { return dsg.item_depth(); }
  // Width of a zero-layer node embedding.
  std::size_t embed_dim(Side side) const {
    return side == Side::kUser ? d_user + d_time : d_item + d_cat + d_time;
  }
};

// key=value lines, one per field, in a fixed order.
std::string ModelConfigToText(const ModelConfig& config);
// Sets one field from its text form. Returns false for keys that are not
// model fields; throws ValueError for malformed values.
bool SetModelConfigKey(ModelConfig& config, const std::string& key, const std::string& value);
// Inverse of ModelConfigToText; unknown keys are a ValueError.
ModelConfig ModelConfigFromText(const std::string& text);

// Parsers shared by config files and flags. Throw ValueError.
std::int64_t ParseInt(const std::string& key, const std::string& value);
double ParseReal(const std::string& key, const std::string& value);
bool ParseBool(const std::string& key, const std::string& value);
std::vector<std::size_t> ParseSizeList(const std::string& key, const std::string& value);
std::string JoinSizes(const std::vector<std::size_t>& values);

// Throws ContractError or ValueError naming the offending field.
void ValidateModelConfig(const ModelConfig& config);

// Bucket of a time decay: 0 for delta = 0, l + 1 for delta in
// [base^l, base^(l+1)), clipped to num_buckets - 1.
std::size_t TimeBucket(std::int64_t delta, std::int64_t base, std::size_t num_buckets);

}  // namespace dsgl

#endif  // DSGL_MODEL_CONFIG_H_
