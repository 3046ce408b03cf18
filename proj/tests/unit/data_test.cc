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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dsgl/core/errors.h"
#include "dsgl/data/events.h"
#include "dsgl/data/split.h"
#include "dsgl/data/synth.h"

namespace dsgl {
namespace {

EventLog Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseEvents(in);
}

std::vector<InteractionEvent> Ticks(std::size_t n, std::int64_t ts_step = 1) {
  std::vector<InteractionEvent> ev;
  for (std::size_t i = 0; i < n; ++i) {
    ev.push_back({static_cast<std::int64_t>(i % 7), static_cast<std::int64_t>(i),
                  0, static_cast<std::int64_t>(i) * ts_step, 1});
  }
  return ev;
}

TEST(LoadEvents, SortsByTimestamp) {
  const EventLog log = Parse("0,0,0,10,1\n1,1,0,5,1\n");
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.events[0].user_id, 1);
  EXPECT_EQ(log.events[0].timestamp, 5);
  EXPECT_EQ(log.events[1].timestamp, 10);
  EXPECT_EQ(log.num_users, 2);
  EXPECT_EQ(log.num_items, 2);
  EXPECT_EQ(log.num_categories, 1);
}

TEST(LoadEvents, TiesKeepInputOrder) {
  const EventLog log = Parse("3,0,0,4,1\n1,0,0,4,1\n2,0,0,4,1\n0,0,0,1,1\n");
  ASSERT_EQ(log.size(), 4u);
  EXPECT_EQ(log.events[1].user_id, 3);
  EXPECT_EQ(log.events[2].user_id, 1);
  EXPECT_EQ(log.events[3].user_id, 2);
}

TEST(LoadEvents, EmptyAndCommentsOnly) {
  const EventLog log = Parse("# header\n\n   \n");
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(log.num_users, 0);
  EXPECT_EQ(log.num_items, 0);
  EXPECT_EQ(log.num_categories, 0);
}

TEST(LoadEvents, MalformedRowNamesLine) {
  try {
    Parse("a,b,c\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  try {
    Parse("# c\n0,0,0,1,1\n0,0,0,1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(Parse("0,0,0,1,1,9\n"), ParseError);
  EXPECT_THROW(Parse("0,0,x1,1,1\n"), ParseError);
  EXPECT_THROW(Parse("0,0,1.5,1,1\n"), ParseError);
}

TEST(LoadEvents, ValueErrors) {
  EXPECT_THROW(Parse("-1,0,0,1,1\n"), ValueError);
  EXPECT_THROW(Parse("0,99999999999999999999999,0,1,1\n"), ValueError);
  EXPECT_THROW(Parse("0,0,0,1,2\n"), ValueError);
}

TEST(LoadEvents, MissingFileNamesPath) {
  try {
    LoadEvents("/nonexistent/dir/events.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/events.csv"), std::string::npos);
  }
}

TEST(LoadEvents, RoundTripThroughFile) {
  const auto path = std::filesystem::temp_directory_path() / "dsgl_data_roundtrip.csv";
  std::vector<InteractionEvent> ev = {{4, 2, 1, 7, 1}, {0, 3, 0, 9, 0}};
  SaveEvents(path.string(), ev);
  const EventLog log = LoadEvents(path.string());
  EXPECT_EQ(log.events, ev);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, kEventHeader);
  std::filesystem::remove(path);
}

TEST(TemporalSplit, HundredEvents) {
  const EventLog log = MakeEventLog(Ticks(100));
  const TemporalSplit s = SplitTemporally(log, 0.85, 0.10);
  EXPECT_EQ(s.train.size(), 76u);
  EXPECT_EQ(s.valid.size(), 9u);
  EXPECT_EQ(s.test.size(), 15u);
  EXPECT_EQ(s.train.events.back().timestamp, 75);
  EXPECT_EQ(s.valid.events.front().timestamp, 76);
  EXPECT_EQ(s.test.events.front().timestamp, 85);
  EXPECT_EQ(s.test.num_items, log.num_items);
}

TEST(TemporalSplit, IdenticalTimestampsUseStableOrder) {
  const EventLog log = MakeEventLog(Ticks(20, 0));
  const TemporalSplit s = SplitTemporally(log);
  EXPECT_EQ(s.train.size(), 15u);
  EXPECT_EQ(s.valid.size(), 2u);
  EXPECT_EQ(s.test.size(), 3u);
  EXPECT_EQ(s.valid.events[0].item_id, 15);
  EXPECT_EQ(s.test.events[0].item_id, 17);
}

TEST(TemporalSplit, TooFewEvents) {
  EXPECT_THROW(SplitTemporally(MakeEventLog(Ticks(2))), SplitError);
  EXPECT_THROW(SplitTemporally(MakeEventLog({})), SplitError);
  EXPECT_NO_THROW(SplitTemporally(MakeEventLog(Ticks(3))));
}

TEST(TemporalSplit, BadFractions) {
  const EventLog log = MakeEventLog(Ticks(10));
  EXPECT_THROW(SplitTemporally(log, 0.0, 0.1), SplitError);
  EXPECT_THROW(SplitTemporally(log, 1.0, 0.1), SplitError);
  EXPECT_THROW(SplitTemporally(log, 0.5, 1.0), SplitError);
}

TEST(TemporalSplit, PartitionProperty) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SynthConfig cfg;
    cfg.num_events = 3 + static_cast<std::int64_t>(seed * 17 % 200);
    cfg.seed = seed;
    const EventLog log = GenerateSynthetic(cfg);
    const double train_frac = 0.3 + 0.02 * static_cast<double>(seed);
    const TemporalSplit s = SplitTemporally(log, train_frac, 0.1);
    std::vector<InteractionEvent> joined = s.train.events;
    joined.insert(joined.end(), s.valid.events.begin(), s.valid.events.end());
    joined.insert(joined.end(), s.test.events.begin(), s.test.events.end());
    EXPECT_EQ(joined, log.events);
    const std::size_t span = static_cast<std::size_t>(std::ceil(train_frac * log.size() - 1e-9));
    EXPECT_EQ(s.train.size() + s.valid.size(), span);
    for (const auto& a : s.train.events) {
      for (const auto& b : s.test.events) ASSERT_LE(a.timestamp, b.timestamp);
    }
  }
}

TEST(NegativeSampling, ForcedChoice) {
  // Items {0, 1}; user 0 only ever saw item 0.
  const EventLog full = MakeEventLog({{0, 0, 3, 1, 1}, {1, 1, 5, 2, 1}});
  const EventLog split = MakeEventLog({{0, 0, 3, 1, 1}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NegativeSamples out = SampleNegatives(split, full, seed);
    ASSERT_EQ(out.samples.size(), 2u);
    EXPECT_EQ(out.samples[0], split.events[0]);
    EXPECT_EQ(out.samples[1].item_id, 1);
    EXPECT_EQ(out.samples[1].category_id, 5);
    EXPECT_EQ(out.samples[1].label, 0);
    EXPECT_EQ(out.samples[1].timestamp, 1);
    EXPECT_EQ(out.warnings, 0u);
  }
}

TEST(NegativeSampling, UserSawEverything) {
  const EventLog full = MakeEventLog({{0, 0, 0, 1, 1}, {0, 1, 0, 2, 1}});
  const EventLog split = MakeEventLog({{0, 1, 0, 2, 1}});
  const NegativeSamples out = SampleNegatives(split, full, 3);
  ASSERT_EQ(out.samples.size(), 1u);
  EXPECT_EQ(out.samples[0].label, 1);
  EXPECT_EQ(out.warnings, 1u);
}

TEST(NegativeSampling, SoundAndDeterministic) {
  SynthConfig cfg;
  cfg.num_users = 30;
  cfg.num_items = 25;
  cfg.num_events = 2000;
  cfg.seed = 11;
  const EventLog full = GenerateSynthetic(cfg);
  const TemporalSplit s = SplitTemporally(full);
  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  for (const auto& e : full.events) pairs.insert({e.user_id, e.item_id});

  const NegativeSamples a = SampleNegatives(s.test, full, 5);
  const NegativeSamples b = SampleNegatives(s.test, full, 5);
  EXPECT_EQ(a.samples, b.samples);
  std::size_t negatives = 0;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const auto& e = a.samples[k];
    if (e.label == 1) continue;
    ++negatives;
    ASSERT_GT(k, 0u);
    EXPECT_EQ(a.samples[k - 1].label, 1);
    EXPECT_EQ(a.samples[k - 1].user_id, e.user_id);
    EXPECT_EQ(a.samples[k - 1].timestamp, e.timestamp);
    EXPECT_EQ(pairs.count({e.user_id, e.item_id}), 0u);
  }
  EXPECT_EQ(negatives + a.warnings, s.test.size());
  const NegativeSamples c = SampleNegatives(s.test, full, 6);
  EXPECT_NE(a.samples, c.samples);
}

TEST(NegativeSampling, DenseUserFallsBackToComplement) {
  // User 0 saw 999 of 1000 items, so rejection sampling almost always fails.
  std::vector<InteractionEvent> ev;
  for (std::int64_t i = 0; i < 1000; ++i) {
    if (i != 612) ev.push_back({0, i, 0, i, 1});
  }
  const EventLog full = MakeEventLog(ev);
  EventLog full_vocab = full;
  full_vocab.num_items = 1000;
  const EventLog split = MakeEventLog({{0, 3, 0, 3, 1}});
  const NegativeSamples out = SampleNegatives(split, full_vocab, 1);
  ASSERT_EQ(out.samples.size(), 2u);
  EXPECT_EQ(out.samples[1].item_id, 612);
  EXPECT_EQ(out.samples[1].category_id, 0);
}

TEST(Synth, AffinityWithoutNoiseOrDrift) {
  SynthConfig cfg;
  cfg.num_users = 50;
  cfg.num_items = 40;
  cfg.num_clusters = 2;
  cfg.num_events = 3000;
  cfg.noise_prob = 0.0;
  cfg.drift_prob = 0.0;
  cfg.seed = 4;
  SynthTrace trace;
  const EventLog log = GenerateSynthetic(cfg, &trace);
  ASSERT_EQ(log.size(), 3000u);
  std::map<std::int64_t, std::int64_t> user_cluster;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& e = log.events[k];
    EXPECT_EQ(e.timestamp, static_cast<std::int64_t>(k));
    EXPECT_EQ(e.category_id, trace.item_cluster[static_cast<std::size_t>(e.item_id)]);
    EXPECT_EQ(e.category_id, trace.event_user_cluster[k]);
    auto [it, inserted] = user_cluster.emplace(e.user_id, trace.event_user_cluster[k]);
    if (!inserted) {
      EXPECT_EQ(it->second, trace.event_user_cluster[k]);
    }
  }
  EXPECT_EQ(log.num_users, 50);
  EXPECT_EQ(log.num_items, 40);
  EXPECT_EQ(log.num_categories, 2);
}

TEST(Synth, FullNoiseIsUniform) {
  SynthConfig cfg;
  cfg.num_users = 50;
  cfg.num_items = 40;
  cfg.num_clusters = 2;
  cfg.num_events = 10000;
  cfg.noise_prob = 1.0;
  cfg.seed = 9;
  const EventLog log = GenerateSynthetic(cfg);
  std::vector<double> counts(40, 0.0);
  for (const auto& e : log.events) counts[static_cast<std::size_t>(e.item_id)] += 1.0;
  const double expected = 10000.0 / 40.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 1% point of chi-square with 39 degrees of freedom.
  EXPECT_LT(chi2, 62.428);
}

TEST(Synth, Deterministic) {
  SynthConfig cfg;
  cfg.num_events = 500;
  cfg.seed = 77;
  EXPECT_EQ(GenerateSynthetic(cfg).events, GenerateSynthetic(cfg).events);
  SynthConfig other = cfg;
  other.seed = 78;
  EXPECT_NE(GenerateSynthetic(cfg).events, GenerateSynthetic(other).events);
}

TEST(Synth, ZeroEventsAndValidation) {
  SynthConfig cfg;
  cfg.num_events = 0;
  EXPECT_TRUE(GenerateSynthetic(cfg).empty());
  cfg.noise_prob = 1.5;
  EXPECT_THROW(GenerateSynthetic(cfg), ValueError);
  cfg.noise_prob = 0.1;
  cfg.num_clusters = 500;
  EXPECT_THROW(GenerateSynthetic(cfg), ValueError);
  cfg.num_clusters = 2;
  cfg.num_users = 0;
  EXPECT_THROW(GenerateSynthetic(cfg), ValueError);
}

}  // namespace
}  // namespace dsgl
