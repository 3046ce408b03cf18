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

#include "dsgl/data/synth.h"

#include <numeric>
#include <string>

#include "dsgl/core/errors.h"
#include "dsgl/core/random.h"

namespace dsgl {

void ValidateSynthConfig(const SynthConfig& cfg) {
  if (cfg.num_users < 1 || cfg.num_items < 1 || cfg.num_clusters < 1) {
    throw ValueError("synthetic users, items and clusters must all be >= 1");
  }
  if (cfg.num_clusters > cfg.num_items) {
    throw ValueError("cannot spread " + std::to_string(cfg.num_items) +
                     " items over " + std::to_string(cfg.num_clusters) + " clusters");
  }
  if (cfg.num_events < 0) throw ValueError("event count must be non-negative");
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(cfg.drift_prob)) throw ValueError("drift_prob must lie in [0, 1]");
  if (!in_unit(cfg.noise_prob)) throw ValueError("noise_prob must lie in [0, 1]");
}

EventLog GenerateSynthetic(const SynthConfig& cfg, SynthTrace* trace) {
  ValidateSynthConfig(cfg);
  Rng rng(cfg.seed);
  const auto num_items = static_cast<std::size_t>(cfg.num_items);
  const auto num_clusters = static_cast<std::size_t>(cfg.num_clusters);

  std::vector<std::int64_t> order(num_items);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  std::vector<std::int64_t> item_cluster(num_items);
  std::vector<std::vector<std::int64_t>> members(num_clusters);
  for (std::size_t pos = 0; pos < num_items; ++pos) {
    const std::size_t c = pos % num_clusters;
    item_cluster[static_cast<std::size_t>(order[pos])] = static_cast<std::int64_t>(c);
  }
  for (std::size_t i = 0; i < num_items; ++i) {
    members[static_cast<std::size_t>(item_cluster[i])].push_back(static_cast<std::int64_t>(i));
  }

  std::vector<std::int64_t> user_cluster(static_cast<std::size_t>(cfg.num_users));
  for (auto& c : user_cluster) c = static_cast<std::int64_t>(rng.UniformIndex(num_clusters));

  EventLog log;
  log.num_users = cfg.num_users;
  log.num_items = cfg.num_items;
  log.num_categories = cfg.num_clusters;
  log.events.reserve(static_cast<std::size_t>(cfg.num_events));
  if (trace) {
    trace->item_cluster = item_cluster;
    trace->event_user_cluster.clear();
  }
  for (std::int64_t t = 0; t < cfg.num_events; ++t) {
    const auto u = static_cast<std::int64_t>(rng.UniformIndex(static_cast<std::uint64_t>(cfg.num_users)));
    auto& cluster = user_cluster[static_cast<std::size_t>(u)];
    if (rng.Bernoulli(cfg.drift_prob)) {
      cluster = static_cast<std::int64_t>(rng.UniformIndex(num_clusters));
    }
    std::int64_t item;
    if (rng.Bernoulli(cfg.noise_prob)) {
      item = static_cast<std::int64_t>(rng.UniformIndex(num_items));
    } else {
      const auto& pool = members[static_cast<std::size_t>(cluster)];
      item = pool[rng.UniformIndex(pool.size())];
    }
    log.events.push_back({u, item, item_cluster[static_cast<std::size_t>(item)], t, 1});
    if (trace) trace->event_user_cluster.push_back(cluster);
  }
  return log;
}

}  // namespace dsgl
