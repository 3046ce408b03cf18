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

#ifndef DSGL_DATA_SPLIT_H_
#define DSGL_DATA_SPLIT_H_

#include <cstdint>
#include <vector>

#include "dsgl/data/events.h"

namespace dsgl {

struct TemporalSplit {
  EventLog train;
  EventLog valid;
  EventLog test;
};

// Positional split of a time-sorted log. The earliest ceil(train_frac * N)
// events form the training span; its last ceil(valid_frac * span) events are
// carved off as validation; the remainder is test. Ties at a cut fall by
// input order. Each part keeps the parent's vocabulary sizes.
// Throws SplitError for fewer than 3 events or fractions outside
// 0 < train_frac < 1, 0 <= valid_frac < 1.
TemporalSplit SplitTemporally(const EventLog& log, double train_frac = 0.85,
                              double valid_frac = 0.10);

struct NegativeSamples {
  // Each positive followed by its sampled negative (same user and timestamp).
  std::vector<InteractionEvent> samples;
  // Positives for which no negative item exists.
  std::size_t warnings = 0;
};

// Pairs every positive event of `split` with one item, uniform over the items
// the user never interacted with anywhere in `full_log`. The negative takes
// the item's category as first seen in `full_log` (0 if never seen).
NegativeSamples SampleNegatives(const EventLog& split, const EventLog& full_log,
                                std::uint64_t seed);

}  // namespace dsgl

#endif  // DSGL_DATA_SPLIT_H_
