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

#include "dsgl/graph/dsg.h"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "dsgl/core/errors.h"

namespace dsgl {

const char* SideName(Side s) { return s == Side::kUser ? "user" : "item"; }

BehaviorIndex::BehaviorIndex(const EventLog& log)
    : BehaviorIndex(std::span<const InteractionEvent>(log.events)) {}

BehaviorIndex::BehaviorIndex(std::span<const InteractionEvent> events) {
  for (const auto& e : events) {
    if (e.label != 1) continue;
    const auto u = static_cast<std::size_t>(e.user_id);
    const auto i = static_cast<std::size_t>(e.item_id);
    if (u >= by_user_.size()) by_user_.resize(u + 1);
    if (i >= by_item_.size()) by_item_.resize(i + 1);
    by_user_[u].push_back({e.item_id, e.category_id, e.timestamp});
    by_item_[i].push_back({e.user_id, 0, e.timestamp});
    ++num_indexed_;
  }
  const auto by_time = [](const Neighbor& a, const Neighbor& b) {
    return a.timestamp < b.timestamp;
  };
  // Input may not be sorted when built from concatenated splits.
  for (auto& list : by_user_) std::stable_sort(list.begin(), list.end(), by_time);
  for (auto& list : by_item_) std::stable_sort(list.begin(), list.end(), by_time);
}

std::span<const Neighbor> BehaviorIndex::History(Side side, std::int64_t id) const {
  const auto& table = side == Side::kUser ? by_user_ : by_item_;
  if (id < 0 || static_cast<std::size_t>(id) >= table.size()) return {};
  return table[static_cast<std::size_t>(id)];
}

std::span<const Neighbor> BehaviorIndex::SequenceBefore(Side side, std::int64_t id,
                                                        std::int64_t t,
                                                        std::size_t m) const {
  const auto all = History(side, id);
  const auto end = std::lower_bound(
      all.begin(), all.end(), t,
      [](const Neighbor& n, std::int64_t value) { return n.timestamp < value; });
  const auto count = static_cast<std::size_t>(end - all.begin());
  const std::size_t keep = std::min(m, count);
  return all.subspan(count - keep, keep);
}

void ValidateDsgSpec(const DsgSpec& spec) {
  if (spec.user_depth() < 1) throw ContractError("user graph depth must be >= 1");
  if (spec.item_depth() + 1 != spec.user_depth()) {
    throw ContractError("item graph depth must be user depth - 1 (user " +
                        std::to_string(spec.user_depth()) + ", item " +
                        std::to_string(spec.item_depth()) + ")");
  }
  for (std::size_t m : spec.user_fanouts) {
    if (m < 1) throw ContractError("fanouts must be >= 1");
  }
  for (std::size_t m : spec.item_fanouts) {
    if (m < 1) throw ContractError("fanouts must be >= 1");
  }
}

namespace {

void Expand(const BehaviorIndex& index, Side side, DsgNode& node,
            std::span<const std::size_t> fanouts) {
  if (fanouts.empty()) return;
  for (const Neighbor& n : index.SequenceBefore(side, node.id, node.timestamp, fanouts[0])) {
    DsgNode child{n.id, n.category, n.timestamp, node.timestamp - n.timestamp, {}};
    Expand(index, Opposite(side), child, fanouts.subspan(1));
    node.children.push_back(std::move(child));
  }
}

void FormatNode(std::ostringstream& os, const DsgNode& node, Side side, int depth) {
  os << std::string(static_cast<std::size_t>(2 * depth), ' ') << SideName(side) << ' '
     << node.id;
  if (side == Side::kItem) os << " cat=" << node.category;
  os << " t=" << node.timestamp << " delta=" << node.delta << '\n';
  for (const auto& c : node.children) FormatNode(os, c, Opposite(side), depth + 1);
}

template <typename T>
void DumpArray(std::ostream& out, const char* name, const std::vector<T>& values) {
  out << name << ':';
  for (const auto& v : values) out << ' ' << static_cast<std::int64_t>(v);
  out << '\n';
}

}  // namespace

DsgNode BuildDsg(const BehaviorIndex& index, Side root_side, std::int64_t root,
                 std::int64_t root_category, std::int64_t t,
                 std::span<const std::size_t> fanouts) {
  DsgNode node{root, root_side == Side::kItem ? root_category : 0, t, 0, {}};
  Expand(index, root_side, node, fanouts);
  return node;
}

std::string FormatDsg(const DsgNode& root, Side root_side) {
  std::ostringstream os;
  FormatNode(os, root, root_side, 0);
  return os.str();
}

namespace {

DsgTree BuildTree(const BehaviorIndex& index, Side root_side,
                  std::span<const InteractionEvent> samples,
                  std::span<const std::size_t> fanouts) {
  DsgTree tree;
  tree.root_side = root_side;
  std::vector<std::int64_t> parent_ids;
  std::vector<std::int64_t> parent_times;
  std::vector<std::uint8_t> parent_valid;
  for (const auto& s : samples) {
    parent_ids.push_back(root_side == Side::kUser ? s.user_id : s.item_id);
    parent_times.push_back(s.timestamp);
    parent_valid.push_back(1);
  }
  Side parent_side = root_side;
  for (std::size_t m : fanouts) {
    DsgLevel level;
    level.side = Opposite(parent_side);
    level.fanout = m;
    level.rows = parent_ids.size();
    const std::size_t n = level.rows * m;
    level.ids.assign(n, 0);
    level.categories.assign(n, 0);
    level.timestamps.assign(n, 0);
    level.deltas.assign(n, 0);
    level.valid.assign(n, 0);
    for (std::size_t p = 0; p < level.rows; ++p) {
      if (!parent_valid[p]) continue;
      const auto seq = index.SequenceBefore(parent_side, parent_ids[p], parent_times[p], m);
      std::size_t slot = p * m + (m - seq.size());
      for (const Neighbor& nb : seq) {
        level.ids[slot] = nb.id;
        level.categories[slot] = nb.category;
        level.timestamps[slot] = nb.timestamp;
        level.deltas[slot] = parent_times[p] - nb.timestamp;
        level.valid[slot] = 1;
        ++slot;
      }
    }
    parent_ids = level.ids;
    parent_times = level.timestamps;
    parent_valid = level.valid;
    parent_side = level.side;
    tree.levels.push_back(std::move(level));
  }
  return tree;
}

}  // namespace

DsgBatch BatchDsgs(const BehaviorIndex& index,
                   std::span<const InteractionEvent> samples,
                   const DsgSpec& spec) {
  ValidateDsgSpec(spec);
  DsgBatch batch;
  batch.batch = samples.size();
  for (const auto& s : samples) {
    batch.user_ids.push_back(s.user_id);
    batch.item_ids.push_back(s.item_id);
    batch.item_categories.push_back(s.category_id);
    batch.times.push_back(s.timestamp);
  }
  batch.user_tree = BuildTree(index, Side::kUser, samples, spec.user_fanouts);
  batch.item_tree = BuildTree(index, Side::kItem, samples, spec.item_fanouts);
  return batch;
}

void DumpBatch(std::ostream& out, const DsgBatch& batch) {
  out << "B=" << batch.batch << " user_fanouts=";
  for (std::size_t k = 0; k < batch.user_tree.levels.size(); ++k) {
    out << (k ? "," : "") << batch.user_tree.levels[k].fanout;
  }
  out << " item_fanouts=";
  for (std::size_t k = 0; k < batch.item_tree.levels.size(); ++k) {
    out << (k ? "," : "") << batch.item_tree.levels[k].fanout;
  }
  out << '\n';
  DumpArray(out, "user_ids", batch.user_ids);
  DumpArray(out, "item_ids", batch.item_ids);
  DumpArray(out, "item_categories", batch.item_categories);
  DumpArray(out, "times", batch.times);
  for (const DsgTree* tree : {&batch.user_tree, &batch.item_tree}) {
    for (std::size_t k = 0; k < tree->levels.size(); ++k) {
      const DsgLevel& level = tree->levels[k];
      out << "[" << SideName(tree->root_side) << "_tree level " << (k + 1) << ' '
          << SideName(level.side) << " nodes, rows=" << level.rows
          << " fanout=" << level.fanout << "]\n";
      DumpArray(out, "ids", level.ids);
      if (level.side == Side::kItem) DumpArray(out, "categories", level.categories);
      DumpArray(out, "deltas", level.deltas);
      DumpArray(out, "valid", level.valid);
    }
  }
}

}  // namespace dsgl
