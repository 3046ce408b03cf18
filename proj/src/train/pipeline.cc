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

#include "dsgl/train/pipeline.h"

#include <charconv>
#include <istream>
#include <sstream>

#include "dsgl/core/errors.h"
#include "dsgl/core/random.h"

namespace dsgl {

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Shortest text that reads back to the same double.
std::string Real17(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

const char* IndexScopeName(IndexScope scope) {
  return scope == IndexScope::kCausalAll ? "causal_all" : "train_only";
}

void SetRunConfigKey(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(ParseInt(key, value));
    c.model.seed = c.seed;
    c.train.seed = c.seed;
  } else if (key == "train_frac") c.train_frac = ParseReal(key, value);
  else if (key == "valid_frac") c.valid_frac = ParseReal(key, value);
  else if (key == "index_scope") {
    if (value == "train_only") c.index_scope = IndexScope::kTrainOnly;
    else if (value == "causal_all") c.index_scope = IndexScope::kCausalAll;
    else throw ValueError("index_scope must be train_only or causal_all, got '" + value + "'");
  } else if (key == "depth") {
    // Resizes both fanout lists, repeating the last entry when growing.
    const std::int64_t depth = ParseInt(key, value);
    if (depth < 1) throw ValueError("depth must be >= 1");
    auto& u = c.model.dsg.user_fanouts;
    auto& i = c.model.dsg.item_fanouts;
    const auto resize = [](std::vector<std::size_t>& f, std::size_t n) {
      const std::size_t fill = f.empty() ? 5 : f.back();
      f.resize(n, fill);
    };
    resize(u, static_cast<std::size_t>(depth));
    resize(i, static_cast<std::size_t>(depth - 1));
  } else if (key == "batch_size") {
    const std::int64_t v = ParseInt(key, value);
    if (v < 1) throw ValueError("batch_size must be >= 1");
    c.train.batch_size = static_cast<std::size_t>(v);
  } else if (key == "chunk_nodes") {
    const std::int64_t v = ParseInt(key, value);
    if (v < 1) throw ValueError("chunk_nodes must be >= 1");
    c.train.chunk_nodes = static_cast<std::size_t>(v);
  } else if (key == "lr") c.train.lr = ParseReal(key, value);
  else if (key == "beta1") c.train.beta1 = ParseReal(key, value);
  else if (key == "beta2") c.train.beta2 = ParseReal(key, value);
  else if (key == "adam_eps") c.train.eps = ParseReal(key, value);
  else if (key == "max_steps") c.train.max_steps = ParseInt(key, value);
  else if (key == "eval_every") c.train.eval_every = ParseInt(key, value);
  else if (key == "patience") c.train.patience = ParseInt(key, value);
  else if (key == "precision") {
    if (value == "f32") c.train.precision = Precision::kF32;
    else if (value == "f64") c.train.precision = Precision::kF64;
    else throw ValueError("precision must be f32 or f64, got '" + value + "'");
  } else if (key == "num_users" || key == "num_items" || key == "num_categories") {
    throw ValueError(key + " is taken from the event file and cannot be set");
  } else if (!SetModelConfigKey(c.model, key, value)) {
    throw ValueError("unknown config key '" + key + "'");
  }
}

void ApplyRunConfigText(RunConfig& c, std::istream& in) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = Trim(raw);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line);
    try {
      SetRunConfigKey(c, Trim(text.substr(0, eq)), Trim(text.substr(eq + 1)));
    } catch (const ValueError& e) {
      throw ParseError(e.what(), line);
    }
  }
}

std::string RunConfigToText(const RunConfig& c) {
  std::ostringstream os;
  os << "seed=" << c.seed << '\n'
     << "train_frac=" << Real17(c.train_frac) << '\n'
     << "valid_frac=" << Real17(c.valid_frac) << '\n'
     << "index_scope=" << IndexScopeName(c.index_scope) << '\n'
     << "batch_size=" << c.train.batch_size << '\n'
     << "chunk_nodes=" << c.train.chunk_nodes << '\n'
     << "lr=" << Real17(c.train.lr) << '\n'
     << "beta1=" << Real17(c.train.beta1) << '\n'
     << "beta2=" << Real17(c.train.beta2) << '\n'
     << "adam_eps=" << Real17(c.train.eps) << '\n'
     << "max_steps=" << c.train.max_steps << '\n'
     << "eval_every=" << c.train.eval_every << '\n'
     << "patience=" << c.train.patience << '\n'
     << "precision=" << PrecisionName(c.train.precision) << '\n';
  // Vocabulary sizes are derived from data, so they are echoed as comments.
  std::istringstream model(ModelConfigToText(c.model));
  std::string line;
  while (std::getline(model, line)) {
    if (line.rfind("num_", 0) == 0 && line.rfind("num_time_buckets", 0) != 0) {
      os << "# " << line << '\n';
    } else if (line.rfind("seed=", 0) != 0) {
      os << line << '\n';
    }
  }
  return os.str();
}

Experiment PrepareExperiment(const EventLog& log, RunConfig& config) {
  config.model.seed = config.seed;
  config.train.seed = config.seed;
  Experiment ex;
  ex.log = log;
  ex.split = SplitTemporally(log, config.train_frac, config.valid_frac);
  const auto sample = [&](const EventLog& part, std::uint64_t stream) {
    NegativeSamples ns = SampleNegatives(part, log, DeriveSeed(config.seed, stream));
    ex.negative_warnings += ns.warnings;
    return std::move(ns.samples);
  };
  ex.train = sample(ex.split.train, 1);
  ex.valid = sample(ex.split.valid, 2);
  ex.test = sample(ex.split.test, 3);

  std::vector<InteractionEvent> span = ex.split.train.events;
  span.insert(span.end(), ex.split.valid.events.begin(), ex.split.valid.events.end());
  ex.train_index = BehaviorIndex(span);
  ex.test_index = config.index_scope == IndexScope::kCausalAll ? BehaviorIndex(log) : ex.train_index;

  config.model.num_users = std::max<std::int64_t>(1, log.num_users);
  config.model.num_items = std::max<std::int64_t>(1, log.num_items);
  config.model.num_categories = std::max<std::int64_t>(1, log.num_categories);
  return ex;
}

std::vector<Real> PopularityScores(const Experiment& ex,
                                   const std::vector<InteractionEvent>& samples) {
  std::vector<Real> counts(static_cast<std::size_t>(std::max<std::int64_t>(1, ex.log.num_items)), 0.0);
  for (const auto& e : ex.split.train.events) {
    if (e.label == 1) counts[static_cast<std::size_t>(e.item_id)] += 1.0;
  }
  for (const auto& e : ex.split.valid.events) {
    if (e.label == 1) counts[static_cast<std::size_t>(e.item_id)] += 1.0;
  }
  std::vector<Real> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) {
    const auto i = static_cast<std::size_t>(s.item_id);
    scores.push_back(i < counts.size() ? counts[i] : 0.0);
  }
  return scores;
}

}  // namespace dsgl
