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

#ifndef DSGL_TRAIN_TRAINER_H_
#define DSGL_TRAIN_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsgl/data/events.h"
#include "dsgl/graph/dsg.h"
#include "dsgl/model/model.h"

namespace dsgl {

enum class Precision { kF64, kF32 };

inline constexpr std::size_t kDefaultChunkNodes = 16384;

// Reads DSGL_PRECISION (f32 or f64, default f64). Throws ValueError otherwise.
Precision PrecisionFromEnv();
const char* PrecisionName(Precision p);

struct TrainConfig {
  std::size_t batch_size = 128;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t max_steps = 5000;
  std::int64_t eval_every = 100;
  std::int64_t patience = 10;
  std::uint64_t seed = 1;
  // With kF32 parameters are rounded to float after init and every update;
  // arithmetic stays in double.
  Precision precision = Precision::kF64;
  // Upper bound on graph nodes per forward pass; larger batches are split
  // into chunks whose gradients are summed, which changes results only by
  // rounding.
  std::size_t chunk_nodes = kDefaultChunkNodes;
};


void ValidateTrainConfig(const TrainConfig& config);

struct EvalRecord {
  std::int64_t step = 0;
  double train_loss = 0.0;  // mean over the steps since the previous record
  double valid_auc = 0.0;
  double valid_logloss = 0.0;
};

struct RunReport {
  std::vector<EvalRecord> records;
  std::int64_t best_step = 0;
  double best_valid_auc = 0.0;
  std::string stopped_reason;  // "early_stop" or "max_steps"
  // Per-step training losses, in order.
  std::vector<double> loss_trace;
};

// `step=<n> loss=<f> valid_auc=<f> valid_logloss=<f>` per record, then
// `best_step=<n> best_auc=<f> reason=<r>`.
void WriteReport(std::ostream& out, const RunReport& report);

struct EvalResult {
  std::optional<double> auc;  // empty when only one class is present
  double logloss = 0.0;
  std::vector<Real> scores;
};

// Forward-only scoring in batches (capped at kDefaultChunkNodes graph nodes
// per pass). Throws ContractError for empty data.
EvalResult Evaluate(const DsglModel& model, const BehaviorIndex& index,
                    std::span<const InteractionEvent> samples, std::size_t batch_size = 256);

// Throws UndefinedMetricError when the AUC is missing.
double RequireAuc(const EvalResult& result);

// Mini-batch Adam with periodic validation and early stopping on validation
// AUC. On return the model holds the parameters of the best evaluation.
// `log` receives one report line per evaluation as it happens.
RunReport Train(DsglModel& model, const BehaviorIndex& index,
                std::span<const InteractionEvent> train, std::span<const InteractionEvent> valid,
                const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace dsgl

#endif  // DSGL_TRAIN_TRAINER_H_
