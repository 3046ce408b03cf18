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

#include "dsgl/data/split.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dsgl/core/errors.h"
#include "dsgl/core/random.h"

namespace dsgl {

namespace {

// ceil() that ignores representation noise such as 0.85 * 100 = 85.000...01.
std::size_t CeilCount(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

EventLog Slice(const EventLog& log, std::size_t begin, std::size_t end) {
  EventLog part;
  part.events.assign(log.events.begin() + static_cast<std::ptrdiff_t>(begin),
                     log.events.begin() + static_cast<std::ptrdiff_t>(end));
  part.num_users = log.num_users;
  part.num_items = log.num_items;
  part.num_categories = log.num_categories;
  return part;
}

constexpr int kRejectionTries = 100;

}  // namespace

TemporalSplit SplitTemporally(const EventLog& log, double train_frac,
                              double valid_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw SplitError("train fraction must lie in (0, 1), got " + std::to_string(train_frac));
  }
  if (!(valid_frac >= 0.0 && valid_frac < 1.0)) {
    throw SplitError("validation fraction must lie in [0, 1), got " + std::to_string(valid_frac));
  }
  const std::size_t n = log.size();
  if (n < 3) {
    throw SplitError("temporal split needs at least 3 events, got " + std::to_string(n));
  }
  const std::size_t span = std::min(n, CeilCount(train_frac, n));
  const std::size_t valid = std::min(span, CeilCount(valid_frac, span));
  TemporalSplit out;
  out.train = Slice(log, 0, span - valid);
  out.valid = Slice(log, span - valid, span);
  out.test = Slice(log, span, n);
  return out;
}

NegativeSamples SampleNegatives(const EventLog& split, const EventLog& full_log,
                                std::uint64_t seed) {
  const auto num_items = static_cast<std::size_t>(full_log.num_items);
  std::vector<std::vector<std::int64_t>> seen(static_cast<std::size_t>(
      std::max(full_log.num_users, split.num_users)));
  std::vector<std::int64_t> item_category(num_items, -1);
  for (const auto& e : full_log.events) {
    if (e.label != 1) continue;
    seen[static_cast<std::size_t>(e.user_id)].push_back(e.item_id);
    auto& cat = item_category[static_cast<std::size_t>(e.item_id)];
    if (cat < 0) cat = e.category_id;
  }
  for (auto& items : seen) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }

  Rng rng(seed);
  NegativeSamples out;
  out.samples.reserve(2 * split.size());
  for (const auto& pos : split.events) {
    if (pos.label != 1) continue;
    out.samples.push_back(pos);
    const auto& interacted = seen[static_cast<std::size_t>(pos.user_id)];
    const auto never_seen = [&](std::int64_t item) {
      return !std::binary_search(interacted.begin(), interacted.end(), item);
    };
    std::int64_t chosen = -1;
    if (num_items > interacted.size()) {
      for (int attempt = 0; attempt < kRejectionTries && chosen < 0; ++attempt) {
        const auto item = static_cast<std::int64_t>(rng.UniformIndex(num_items));
        if (never_seen(item)) chosen = item;
      }
      if (chosen < 0) {
        // Dense users: draw directly from the complement.
        std::vector<std::int64_t> candidates;
        for (std::size_t i = 0; i < num_items; ++i) {
          if (never_seen(static_cast<std::int64_t>(i))) candidates.push_back(static_cast<std::int64_t>(i));
        }
        chosen = candidates[rng.UniformIndex(candidates.size())];
      }
    }
    if (chosen < 0) {
      ++out.warnings;
      std::fprintf(stderr, "warning: user %lld interacted with every item; no negative sampled\n",
                   static_cast<long long>(pos.user_id));
      continue;
    }
    InteractionEvent neg = pos;
    neg.item_id = chosen;
    neg.category_id = std::max<std::int64_t>(0, item_category[static_cast<std::size_t>(chosen)]);
    neg.label = 0;
    out.samples.push_back(neg);
  }
  return out;
}

}  // namespace dsgl
