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

#ifndef DSGL_DATA_EVENTS_H_
#define DSGL_DATA_EVENTS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dsgl {

// One (user, item, category, timestamp, label) record. Observed interactions
// carry label 1; sampled negatives carry label 0.
struct InteractionEvent {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  std::int64_t category_id = 0;
  std::int64_t timestamp = 0;
  int label = 1;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

// Events sorted non-decreasing by timestamp (stable w.r.t. input order) plus
// vocabulary sizes; every id is below its vocabulary size.
struct EventLog {
  std::vector<InteractionEvent> events;
  std::int64_t num_users = 0;
  std::int64_t num_items = 0;
  std::int64_t num_categories = 0;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

// Stable-sorts `events` by timestamp; vocab sizes are 1 + the max id seen.
EventLog MakeEventLog(std::vector<InteractionEvent> events);

// Text format: one `user_id,item_id,category_id,timestamp,label` per line;
// blank lines and lines starting with '#' are ignored. Malformed rows raise
// ParseError carrying the 1-based line number; negative or out-of-range
// numbers raise ValueError.
EventLog ParseEvents(std::istream& in);
EventLog LoadEvents(const std::string& path);

inline constexpr char kEventHeader[] = "# user_id,item_id,category_id,timestamp,label";

void WriteEvents(std::ostream& out, const std::vector<InteractionEvent>& events);
void SaveEvents(const std::string& path, const std::vector<InteractionEvent>& events);

}  // namespace dsgl

#endif  // DSGL_DATA_EVENTS_H_
