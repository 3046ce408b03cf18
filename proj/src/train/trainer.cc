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

#include "dsgl/train/trainer.h"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "dsgl/core/errors.h"
#include "dsgl/core/ops.h"
#include "dsgl/core/optim.h"
#include "dsgl/core/random.h"
#include "dsgl/metrics/metrics.h"

namespace dsgl {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

std::vector<Real> Labels(std::span<const InteractionEvent> samples) {
  std::vector<Real> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(static_cast<Real>(s.label));
  return y;
}

// Samples per forward pass so one pass touches at most `budget` graph nodes.
std::size_t ChunkSize(const DsgSpec& spec, std::size_t budget) {
  std::size_t nodes = 2;
  for (const auto* fanouts : {&spec.user_fanouts, &spec.item_fanouts}) {
    std::size_t width = 1;
    for (std::size_t m : *fanouts) {
      width *= m;
      nodes += width;
    }
  }
  return std::max<std::size_t>(1, budget / nodes);
}

}  // namespace

Precision PrecisionFromEnv() {
  const char* v = std::getenv("DSGL_PRECISION");
  if (v == nullptr || std::string(v).empty() || std::string(v) == "f64") return Precision::kF64;
  if (std::string(v) == "f32") return Precision::kF32;
  throw ValueError(std::string("DSGL_PRECISION must be f32 or f64, got '") + v + "'");
}

const char* PrecisionName(Precision p) { return p == Precision::kF32 ? "f32" : "f64"; }

void ValidateTrainConfig(const TrainConfig& c) {
  if (c.batch_size < 1) throw ValueError("batch_size must be >= 1");
  if (c.chunk_nodes < 1) throw ValueError("chunk_nodes must be >= 1");
  if (c.patience < 1) throw ValueError("patience must be >= 1");
  if (c.eval_every < 1) throw ValueError("eval_every must be >= 1");
  if (c.max_steps < 0) throw ValueError("max_steps must be >= 0");
  if (!(c.lr >= 0.0)) throw ValueError("lr must be >= 0");
}

void WriteReport(std::ostream& out, const RunReport& r) {
  out << std::setprecision(6) << std::fixed;
  for (const auto& rec : r.records) {
    out << "step=" << rec.step << " loss=" << rec.train_loss << " valid_auc=" << rec.valid_auc
        << " valid_logloss=" << rec.valid_logloss << '\n';
  }
  out << "best_step=" << r.best_step << " best_auc=" << r.best_valid_auc
      << " reason=" << r.stopped_reason << '\n';
  out << std::defaultfloat;
}

EvalResult Evaluate(const DsglModel& model, const BehaviorIndex& index,
                    std::span<const InteractionEvent> samples, std::size_t batch_size) {
  if (samples.empty()) throw ContractError("evaluate needs at least one sample");
  if (batch_size == 0) throw ValueError("evaluation batch size must be >= 1");
  batch_size = std::min(batch_size, ChunkSize(model.config().dsg, kDefaultChunkNodes));
  EvalResult result;
  result.scores.reserve(samples.size());
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const auto chunk = samples.subspan(begin, std::min(batch_size, samples.size() - begin));
    const Tensor p = model.Predict(BatchDsgs(index, chunk, model.config().dsg));
    result.scores.insert(result.scores.end(), p.data().begin(), p.data().end());
  }
  const std::vector<Real> y = Labels(samples);
  result.logloss = LogLoss(result.scores, y);
  try {
    result.auc = Auc(result.scores, y);
  } catch (const UndefinedMetricError&) {
    result.auc.reset();
  }
  return result;
}

double RequireAuc(const EvalResult& result) {
  if (!result.auc) throw UndefinedMetricError("AUC is undefined: evaluation data has a single class");
  return *result.auc;
}

RunReport Train(DsglModel& model, const BehaviorIndex& index,
                std::span<const InteractionEvent> train, std::span<const InteractionEvent> valid,
                const TrainConfig& config, std::ostream* log) {
  ValidateTrainConfig(config);
  if (train.empty() || valid.empty()) {
    throw ContractError("training needs non-empty train and validation sets");
  }
  ParamStore& params = model.params();
  if (config.precision == Precision::kF32) params.RoundToFloat();
  AdamState adam = MakeAdamState(params.tensors(), {config.lr, config.beta1, config.beta2, config.eps});

  // Validation graphs do not change between evaluations.
  const DsgSpec& spec = model.config().dsg;
  const std::size_t chunk = ChunkSize(spec, config.chunk_nodes);
  const std::size_t eval_batch = std::min<std::size_t>(256, chunk);
  std::vector<DsgBatch> valid_batches;
  for (std::size_t begin = 0; begin < valid.size(); begin += eval_batch) {
    valid_batches.push_back(BatchDsgs(
        index, valid.subspan(begin, std::min(eval_batch, valid.size() - begin)), spec));
  }
  const std::vector<Real> valid_labels = Labels(valid);

  RunReport report;
  report.stopped_reason = "max_steps";
  std::vector<std::vector<Real>> best;
  std::int64_t since_best = 0;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;

  std::vector<std::size_t> order(train.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  std::vector<InteractionEvent> batch_samples;
  std::vector<Real> batch_labels;

  const auto evaluate = [&](std::int64_t step) {
    std::vector<Real> scores;
    scores.reserve(valid.size());
    for (const DsgBatch& b : valid_batches) {
      const Tensor p = model.Predict(b);
      scores.insert(scores.end(), p.data().begin(), p.data().end());
    }
    EvalRecord rec;
    rec.step = step;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.valid_auc = Auc(scores, valid_labels);
    rec.valid_logloss = LogLoss(scores, valid_labels);
    loss_sum = 0.0;
    loss_count = 0;
    report.records.push_back(rec);
    if (log) {
      *log << std::setprecision(6) << std::fixed << "step=" << rec.step << " loss=" << rec.train_loss
           << " valid_auc=" << rec.valid_auc << " valid_logloss=" << rec.valid_logloss << std::endl
           << std::defaultfloat;
    }
    if (report.records.size() == 1 || rec.valid_auc > report.best_valid_auc) {
      report.best_valid_auc = rec.valid_auc;
      report.best_step = step;
      best = params.Snapshot();
      since_best = 0;
      return false;
    }
    return ++since_best >= config.patience;
  };

  std::int64_t step = 0;
  bool stopped = false;
  while (step < config.max_steps) {
    if (cursor >= order.size()) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng(DeriveSeed(config.seed, kShuffleStream + epoch++));
      rng.Shuffle(order);
      cursor = 0;
    }
    const std::size_t take = std::min(config.batch_size, order.size() - cursor);
    batch_samples.clear();
    for (std::size_t k = 0; k < take; ++k) batch_samples.push_back(train[order[cursor + k]]);
    const std::size_t batch_index = cursor / config.batch_size;
    cursor += take;
    batch_labels = Labels(batch_samples);

    // Gradients of the batch loss accumulate over chunks of the batch.
    const Real scale =
        model.config().loss_reduction == Reduction::kMean ? 1.0 / static_cast<Real>(take) : 1.0;
    params.ZeroGrad();
    ++step;
    double step_loss = 0.0;
    for (std::size_t begin = 0; begin < take; begin += chunk) {
      const std::size_t n = std::min(chunk, take - begin);
      const DsgBatch batch =
          BatchDsgs(index, std::span(batch_samples).subspan(begin, n), spec);
      Tape tape;
      Tensor loss;
      {
        TapeScope scope(tape);
        loss = Scale(BinaryCrossEntropy(model.Predict(batch),
                                        std::span(batch_labels).subspan(begin, n), 1e-7,
                                        Reduction::kSum),
                     scale);
      }
      if (!std::isfinite(loss.item())) {
        throw NumericalError("non-finite training loss at step " + std::to_string(step) +
                             " (epoch " + std::to_string(epoch - 1) + ", batch " +
                             std::to_string(batch_index) + ")");
      }
      tape.Backward(loss);
      step_loss += loss.item();
    }
    AdamStep(params.tensors(), adam);
    if (config.precision == Precision::kF32) params.RoundToFloat();
    report.loss_trace.push_back(step_loss);
    loss_sum += step_loss;
    ++loss_count;

    if (step % config.eval_every == 0 && evaluate(step)) {
      report.stopped_reason = "early_stop";
      stopped = true;
      break;
    }
  }
  if (!stopped && (report.records.empty() || report.records.back().step != step)) {
    evaluate(step);
  }
  if (!best.empty()) params.Restore(best);
  params.ZeroGrad();
  return report;
}

}  // namespace dsgl
