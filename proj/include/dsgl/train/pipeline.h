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

#ifndef DSGL_TRAIN_PIPELINE_H_
#define DSGL_TRAIN_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsgl/data/events.h"
#include "dsgl/data/split.h"
#include "dsgl/graph/dsg.h"
#include "dsgl/model/config.h"
#include "dsgl/train/trainer.h"

namespace dsgl {

// Which events test-time graphs may see. kTrainOnly: the training span
// (train + validation). kCausalAll: every logged event; strict tau < t still
// keeps each graph in the past.
enum class IndexScope { kTrainOnly, kCausalAll };

const char* IndexScopeName(IndexScope scope);

// Everything a command needs: data, model and training settings, mirrored
// one-to-one by config-file keys and command-line flags.
struct RunConfig {
  double train_frac = 0.85;
  double valid_frac = 0.10;
  IndexScope index_scope = IndexScope::kTrainOnly;
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 1;
};

// Sets one key; throws ValueError for unknown keys or bad values. `seed`
// sets the model, training and sampling seeds together.
void SetRunConfigKey(RunConfig& config, const std::string& key, const std::string& value);
// Applies `key=value` lines ('#' comments and blank lines skipped).
void ApplyRunConfigText(RunConfig& config, std::istream& in);
// Effective configuration, one key=value per line; reading it back with
// ApplyRunConfigText reproduces the run.
std::string RunConfigToText(const RunConfig& config);

struct Experiment {
  EventLog log;
  TemporalSplit split;
  // Positives followed by their sampled negatives.
  std::vector<InteractionEvent> train;
  std::vector<InteractionEvent> valid;
  std::vector<InteractionEvent> test;
  // Index over train + validation positives; used for training and
  // validation graphs.
  BehaviorIndex train_index;
  // Index for test graphs, per the configured scope.
  BehaviorIndex test_index;
  std::size_t negative_warnings = 0;
};

// Split, negative sampling and indexes. The model vocabulary is copied from
// the log into `config.model`, and `config.seed` into the model and training
// seeds.
Experiment PrepareExperiment(const EventLog& log, RunConfig& config);

// Scores every sample by how often its item occurs among training positives.
std::vector<Real> PopularityScores(const Experiment& experiment,
                                   const std::vector<InteractionEvent>& samples);

}  // namespace dsgl

#endif  // DSGL_TRAIN_PIPELINE_H_
