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

#ifndef DSGL_GRAPH_DSG_H_
#define DSGL_GRAPH_DSG_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsgl/data/events.h"

namespace dsgl {

enum class Side { kUser, kItem };

inline Side Opposite(Side s) { return s == Side::kUser ? Side::kItem : Side::kUser; }
const char* SideName(Side s);

// One past interaction of an entity. For a user's history `id` is the item
// and `category` its category; for an item's history `id` is the user and
// `category` is 0.
struct Neighbor {
  std::int64_t id = 0;
  std::int64_t category = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Time-ascending interaction lists per user and per item, built from label-1
// events only. Immutable after construction.
class BehaviorIndex {
 public:
  BehaviorIndex() = default;
  explicit BehaviorIndex(const EventLog& log);
  explicit BehaviorIndex(std::span<const InteractionEvent> events);

  // Whole history of an entity; empty for ids never seen.
  std::span<const Neighbor> History(Side side, std::int64_t id) const;

  // The last min(m, count) interactions of `id` strictly before `t`,
  // oldest first.
  std::span<const Neighbor> SequenceBefore(Side side, std::int64_t id,
                                           std::int64_t t, std::size_t m) const;

  std::size_t num_indexed() const { return num_indexed_; }

 private:
  std::vector<std::vector<Neighbor>> by_user_;
  std::vector<std::vector<Neighbor>> by_item_;
  std::size_t num_indexed_ = 0;
};

// Depths and per-level truncation of both trees. The item tree is always one
// level shallower than the user tree.
struct DsgSpec {
  std::vector<std::size_t> user_fanouts = {100, 5, 5};
  std::vector<std::size_t> item_fanouts = {50, 5};

  std::size_t user_depth() const { return user_fanouts.size(); }
  std::size_t item_depth() const { return item_fanouts.size(); }
  const std::vector<std::size_t>& fanouts(Side root) const {
    return root == Side::kUser ? user_fanouts : item_fanouts;
  }
};

// Throws ContractError unless depth >= 1, item depth = user depth - 1 and all
// fanouts >= 1.
void ValidateDsgSpec(const DsgSpec& spec);

struct DsgNode {
  std::int64_t id = 0;
  std::int64_t category = 0;
  std::int64_t timestamp = 0;
  // Parent time minus own time; 0 at the root.
  std::int64_t delta = 0;
  std::vector<DsgNode> children;

  friend bool operator==(const DsgNode&, const DsgNode&) = default;
};

// Recursive graph of `root` at time t with one level per fanout entry.
// Children of a node (v, tau) are v's last m interactions strictly before tau.
DsgNode BuildDsg(const BehaviorIndex& index, Side root_side, std::int64_t root,
                 std::int64_t root_category, std::int64_t t,
                 std::span<const std::size_t> fanouts);

// Indented rendering of a nested graph.
std::string FormatDsg(const DsgNode& root, Side root_side);

// One level of a padded tree. Level k has rows = B * m^1 * ... * m^(k-1)
// parent slots, each holding m^k child slots; slot s belongs to parent slot
// s / fanout of the previous level (or to batch row s / fanout at level 1).
// Valid children are right-aligned inside their row. Padded slots hold zeros.
struct DsgLevel {
  Side side = Side::kItem;
  std::size_t fanout = 0;
  std::size_t rows = 0;
  std::vector<std::int64_t> ids;
  std::vector<std::int64_t> categories;  // all zero on user levels
  std::vector<std::int64_t> timestamps;
  std::vector<std::int64_t> deltas;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return ids.size(); }
};

struct DsgTree {
  Side root_side = Side::kUser;
  std::vector<DsgLevel> levels;
};

struct DsgBatch {
  std::size_t batch = 0;
  std::vector<std::int64_t> user_ids;
  std::vector<std::int64_t> item_ids;
  std::vector<std::int64_t> item_categories;
  std::vector<std::int64_t> times;
  DsgTree user_tree;
  DsgTree item_tree;

  const DsgTree& tree(Side root) const { return root == Side::kUser ? user_tree : item_tree; }
};

// Materializes the user-rooted and item-rooted graphs of every sample.
// Only user, item, category and timestamp of each sample are read.
DsgBatch BatchDsgs(const BehaviorIndex& index,
                   std::span<const InteractionEvent> samples,
                   const DsgSpec& spec);

// Text dump: a header line with B and fanouts, then per tree and level one
// line per array in row-major order.
void DumpBatch(std::ostream& out, const DsgBatch& batch);

}  // namespace dsgl

#endif  // DSGL_GRAPH_DSG_H_
