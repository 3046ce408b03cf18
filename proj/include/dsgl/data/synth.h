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

#ifndef DSGL_DATA_SYNTH_H_
#define DSGL_DATA_SYNTH_H_

#include <cstdint>
#include <vector>

#include "dsgl/data/events.h"

namespace dsgl {

struct SynthConfig {
  std::int64_t num_users = 200;
  std::int64_t num_items = 100;
  std::int64_t num_clusters = 2;
  std::int64_t num_events = 20000;
  // Chance, per event, that the acting user's latent cluster is redrawn.
  double drift_prob = 0.01;
  // Chance, per event, that the item is drawn uniformly instead of from the
  // user's cluster.
  double noise_prob = 0.2;
  std::uint64_t seed = 1;
};

// Latent assignments behind a generated log, for tests.
struct SynthTrace {
  std::vector<std::int64_t> item_cluster;
  // Cluster of the acting user at each event, after any drift.
  std::vector<std::int64_t> event_user_cluster;
};

// Throws ValueError for probabilities outside [0, 1], non-positive vocab
// sizes, more clusters than items, or a negative event count.
void ValidateSynthConfig(const SynthConfig& cfg);

// Items get clusters round-robin over a seeded permutation, so every cluster
// is non-empty; users start in a uniform cluster. Event t (timestamp t) picks
// a uniform user, applies drift, then picks an item. An item's category is
// its cluster. Vocab sizes are taken from the config, not the sample.
EventLog GenerateSynthetic(const SynthConfig& cfg, SynthTrace* trace = nullptr);

}  // namespace dsgl

#endif  // DSGL_DATA_SYNTH_H_
