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

#include "dsgl/model/config.h"

#include <sstream>

#include "dsgl/core/errors.h"

namespace dsgl {

void ApplyAblation(Ablation& a, const std::string& names) {
  std::stringstream ss(names);
  std::string name;
  while (std::getline(ss, name, '+')) {
    if (name == "no_time") a.no_time = true;
    else if (name == "no_seq_enc") a.no_seq_enc = true;
    else if (name == "no_tase") a.no_tase = true;
    else if (name == "no_att") a.no_att = true;
    else if (name == "no_taatt") a.no_taatt = true;
    else if (name == "no_paatt") a.no_paatt = true;
    else if (name == "no_lc") a.no_lc = true;
    else if (name == "full" || name == "none" || name.empty()) continue;
    else throw ValueError("unknown ablation '" + name + "'");
  }
}

std::string AblationToString(const Ablation& a) {
  std::string out;
  const auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(a.no_time, "no_time");
  add(a.no_seq_enc, "no_seq_enc");
  add(a.no_tase, "no_tase");
  add(a.no_att, "no_att");
  add(a.no_taatt, "no_taatt");
  add(a.no_paatt, "no_paatt");
  add(a.no_lc, "no_lc");
  return out.empty() ? "none" : out;
}

void ValidateModelConfig(const ModelConfig& c) {
  ValidateDsgSpec(c.dsg);
  if (c.num_users < 1 || c.num_items < 1 || c.num_categories < 1) {
    throw ValueError("vocabulary sizes must be >= 1");
  }
  if (c.d_user < 1 || c.d_item < 1 || c.d_cat < 1 || c.d_time < 1 || c.hidden < 1) {
    throw ValueError("embedding and hidden dimensions must be >= 1");
  }
  if (c.heads < 1 || c.hidden % c.heads != 0) {
    throw ContractError("hidden (" + std::to_string(c.hidden) + ") must be divisible by heads (" +
                        std::to_string(c.heads) + ")");
  }
  for (std::size_t w : c.mlp_hidden) {
    if (w < 1) throw ValueError("MLP widths must be >= 1");
  }
  if (c.time_base < 2) throw ValueError("time bucket base must be an integer >= 2");
  if (c.num_time_buckets < 2) throw ValueError("need at least 2 time buckets");
  if (c.ablation.no_taatt && c.ablation.no_paatt) {
    throw ContractError("no_taatt and no_paatt together leave attention without a query");
  }
}

std::size_t TimeBucket(std::int64_t delta, std::int64_t base, std::size_t num_buckets) {
  if (delta < 0) throw ValueError("negative time decay " + std::to_string(delta));
  if (delta == 0) return 0;
  // p = base^l with p <= delta < p * base.
  std::int64_t p = 1;
  std::size_t l = 0;
  while (p <= delta / base) {
    p *= base;
    ++l;
  }
  return std::min(l + 1, num_buckets - 1);
}

}  // namespace dsgl

namespace dsgl {

std::int64_t ParseInt(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ValueError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

double ParseReal(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ValueError(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValueError(key + ": expected true or false, got '" + value + "'");
}

std::vector<std::size_t> ParseSizeList(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  if (value.empty()) return out;
  std::stringstream ss(value);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    const std::int64_t v = ParseInt(key, piece);
    if (v < 0) throw ValueError(key + ": negative entry " + piece);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string JoinSizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(values[k]);
  }
  return out;
}

namespace {

std::size_t ParseSize(const std::string& key, const std::string& value) {
  const std::int64_t v = ParseInt(key, value);
  if (v < 0) throw ValueError(key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string ModelConfigToText(const ModelConfig& c) {
  std::ostringstream os;
  os << "num_users=" << c.num_users << '\n'
     << "num_items=" << c.num_items << '\n'
     << "num_categories=" << c.num_categories << '\n'
     << "d_user=" << c.d_user << '\n'
     << "d_item=" << c.d_item << '\n'
     << "d_cat=" << c.d_cat << '\n'
     << "d_time=" << c.d_time << '\n'
     << "hidden=" << c.hidden << '\n'
     << "heads=" << c.heads << '\n'
     << "mlp_hidden=" << JoinSizes(c.mlp_hidden) << '\n'
     << "time_base=" << c.time_base << '\n'
     << "num_time_buckets=" << c.num_time_buckets << '\n'
     << "user_fanouts=" << JoinSizes(c.dsg.user_fanouts) << '\n'
     << "item_fanouts=" << JoinSizes(c.dsg.item_fanouts) << '\n'
     << "ablate=" << AblationToString(c.ablation) << '\n'
     << "attn_scale_outside=" << (c.attn_scale_outside ? "true" : "false") << '\n'
     << "loss_reduction=" << (c.loss_reduction == Reduction::kSum ? "sum" : "mean") << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

bool SetModelConfigKey(ModelConfig& c, const std::string& key, const std::string& value) {
  if (key == "num_users") c.num_users = ParseInt(key, value);
  else if (key == "num_items") c.num_items = ParseInt(key, value);
  else if (key == "num_categories") c.num_categories = ParseInt(key, value);
  else if (key == "d_user") c.d_user = ParseSize(key, value);
  else if (key == "d_item") c.d_item = ParseSize(key, value);
  else if (key == "d_cat") c.d_cat = ParseSize(key, value);
  else if (key == "d_time") c.d_time = ParseSize(key, value);
  else if (key == "hidden") c.hidden = ParseSize(key, value);
  else if (key == "heads") c.heads = ParseSize(key, value);
  else if (key == "mlp_hidden") c.mlp_hidden = ParseSizeList(key, value);
  else if (key == "time_base") c.time_base = ParseInt(key, value);
  else if (key == "num_time_buckets") c.num_time_buckets = ParseSize(key, value);
  else if (key == "user_fanouts") c.dsg.user_fanouts = ParseSizeList(key, value);
  else if (key == "item_fanouts") c.dsg.item_fanouts = ParseSizeList(key, value);
  else if (key == "ablate") {
    c.ablation = Ablation{};
    ApplyAblation(c.ablation, value);
  } else if (key == "attn_scale_outside") c.attn_scale_outside = ParseBool(key, value);
  else if (key == "loss_reduction") {
    if (value == "mean") c.loss_reduction = Reduction::kMean;
    else if (value == "sum") c.loss_reduction = Reduction::kSum;
    else throw ValueError("loss_reduction must be mean or sum, got '" + value + "'");
  } else if (key == "seed") c.seed = static_cast<std::uint64_t>(ParseInt(key, value));
  else return false;
  return true;
}

ModelConfig ModelConfigFromText(const std::string& text) {
  ModelConfig c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValueError("config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    if (!SetModelConfigKey(c, key, line.substr(eq + 1))) {
      throw ValueError("unknown model config key '" + key + "'");
    }
  }
  return c;
}

}  // namespace dsgl
