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

#ifndef DSGL_TESTS_SUPPORT_DSG_ORACLE_H_
#define DSGL_TESTS_SUPPORT_DSG_ORACLE_H_

#include <functional>
#include <vector>

#include "dsgl/core/random.h"
#include "dsgl/data/events.h"
#include "dsgl/graph/dsg.h"

namespace dsgl::testing {

// Reference graph builder: rescans the whole log at every node.
inline DsgNode NaiveDsg(const std::vector<InteractionEvent>& log, Side side,
                        std::int64_t id, std::int64_t category, std::int64_t t,
                        std::int64_t delta, const std::vector<std::size_t>& fanouts,
                        std::size_t level = 0) {
  DsgNode node{id, side == Side::kItem ? category : 0, t, delta, {}};
  if (level == fanouts.size()) return node;
  std::vector<InteractionEvent> earlier;
  for (const auto& e : log) {
    if (e.label != 1 || e.timestamp >= t) continue;
    if ((side == Side::kUser ? e.user_id : e.item_id) == id) earlier.push_back(e);
  }
  const std::size_t m = fanouts[level];
  const std::size_t start = earlier.size() > m ? earlier.size() - m : 0;
  for (std::size_t k = start; k < earlier.size(); ++k) {
    const auto& e = earlier[k];
    if (side == Side::kUser) {
      node.children.push_back(NaiveDsg(log, Side::kItem, e.item_id, e.category_id,
                                       e.timestamp, t - e.timestamp, fanouts, level + 1));
    } else {
      node.children.push_back(NaiveDsg(log, Side::kUser, e.user_id, 0, e.timestamp,
                                       t - e.timestamp, fanouts, level + 1));
    }
  }
  return node;
}

// Random log with heavy timestamp collisions and a few negatives.
inline EventLog RandomLog(Rng& rng, std::size_t max_events) {
  const std::size_t n = rng.UniformIndex(max_events + 1);
  const auto users = 1 + rng.UniformIndex(12);
  const auto items = 1 + rng.UniformIndex(12);
  const auto span = 1 + rng.UniformIndex(60);
  std::vector<InteractionEvent> ev;
  for (std::size_t k = 0; k < n; ++k) {
    const auto item = static_cast<std::int64_t>(rng.UniformIndex(items));
    ev.push_back({static_cast<std::int64_t>(rng.UniformIndex(users)), item, item % 3,
                  static_cast<std::int64_t>(rng.UniformIndex(span)),
                  rng.Bernoulli(0.1) ? 0 : 1});
  }
  return MakeEventLog(std::move(ev));
}

// Walks a padded tree and rebuilds the nested form of one batch row. Clears
// `well_formed` if a valid slot follows a padded one or padding is nonzero.
inline DsgNode Unpad(const DsgBatch& b, Side root_side, std::size_t row, bool* well_formed) {
  const DsgTree& tree = b.tree(root_side);
  DsgNode root{root_side == Side::kUser ? b.user_ids[row] : b.item_ids[row],
               root_side == Side::kUser ? 0 : b.item_categories[row], b.times[row], 0, {}};
  std::function<void(DsgNode&, std::size_t, std::size_t)> fill =
      [&](DsgNode& node, std::size_t level, std::size_t slot) {
        if (level == tree.levels.size()) return;
        const DsgLevel& l = tree.levels[level];
        bool seen_valid = false;
        for (std::size_t j = 0; j < l.fanout; ++j) {
          const std::size_t s = slot * l.fanout + j;
          if (!l.valid[s]) {
            if (seen_valid || l.ids[s] != 0 || l.deltas[s] != 0) *well_formed = false;
            continue;
          }
          seen_valid = true;
          DsgNode child{l.ids[s], l.categories[s], l.timestamps[s], l.deltas[s], {}};
          fill(child, level + 1, s);
          node.children.push_back(std::move(child));
        }
      };
  fill(root, 0, row);
  return root;
}

}  // namespace dsgl::testing

#endif  // DSGL_TESTS_SUPPORT_DSG_ORACLE_H_
