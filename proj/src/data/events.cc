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

#include "dsgl/data/events.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "dsgl/core/errors.h"

namespace dsgl {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t ParseField(std::string_view text, const char* name,
                        std::size_t line) {
  text = Trim(text);
  std::int64_t value = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc::result_out_of_range) {
    throw ValueError("line " + std::to_string(line) + ": " + name + " '" +
                     std::string(text) + "' overflows a 64-bit integer");
  }
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(std::string("expected integer ") + name + ", got '" +
                         std::string(text) + "'",
                     line);
  }
  if (value < 0) {
    throw ValueError("line " + std::to_string(line) + ": " + name +
                     " must be non-negative, got " + std::to_string(value));
  }
  return value;
}

}  // namespace

EventLog MakeEventLog(std::vector<InteractionEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
  EventLog log;
  for (const auto& e : events) {
    log.num_users = std::max(log.num_users, e.user_id + 1);
    log.num_items = std::max(log.num_items, e.item_id + 1);
    log.num_categories = std::max(log.num_categories, e.category_id + 1);
  }
  log.events = std::move(events);
  return log;
}

EventLog ParseEvents(std::istream& in) {
  static constexpr std::array<const char*, 5> kFields = {
      "user_id", "item_id", "category_id", "timestamp", "label"};
  std::vector<InteractionEvent> events;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = Trim(raw);
    if (text.empty() || text.front() == '#') continue;
    std::array<std::int64_t, 5> values{};
    std::size_t field = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      const std::string_view piece =
          text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start);
      if (field >= kFields.size()) {
        throw ParseError("expected 5 comma-separated fields", line);
      }
      if (Trim(piece).empty() ||
          !(std::isdigit(static_cast<unsigned char>(Trim(piece).front())) ||
            Trim(piece).front() == '-' || Trim(piece).front() == '+')) {
        throw ParseError(std::string("expected integer ") + kFields[field] +
                             ", got '" + std::string(Trim(piece)) + "'",
                         line);
      }
      values[field] = ParseField(piece, kFields[field], line);
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != kFields.size()) {
      throw ParseError("expected 5 comma-separated fields, got " + std::to_string(field), line);
    }
    if (values[4] > 1) {
      throw ValueError("line " + std::to_string(line) + ": label must be 0 or 1, got " +
                       std::to_string(values[4]));
    }
    events.push_back({values[0], values[1], values[2], values[3],
                      static_cast<int>(values[4])});
  }
  return MakeEventLog(std::move(events));
}

EventLog LoadEvents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open event file '" + path + "'");
  return ParseEvents(in);
}

void WriteEvents(std::ostream& out, const std::vector<InteractionEvent>& events) {
  out << kEventHeader << '\n';
  for (const auto& e : events) {
    out << e.user_id << ',' << e.item_id << ',' << e.category_id << ','
        << e.timestamp << ',' << e.label << '\n';
  }
}

void SaveEvents(const std::string& path, const std::vector<InteractionEvent>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write event file '" + path + "'");
  WriteEvents(out, events);
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace dsgl
