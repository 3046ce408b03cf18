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

#include "dsgl/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dsgl/core/errors.h"

namespace dsgl {

namespace {

void CheckLengths(std::span<const Real> scores, std::span<const Real> labels) {
  if (scores.size() != labels.size()) {
    throw ValueError("got " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  }
}

}  // namespace

double Auc(std::span<const Real> scores, std::span<const Real> labels) {
  CheckLengths(scores, labels);
  std::size_t positives = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (!std::isfinite(scores[k])) throw ValueError("AUC needs finite scores");
    if (labels[k] != 0.0 && labels[k] != 1.0) throw ValueError("labels must be 0 or 1");
    if (labels[k] == 1.0) ++positives;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("AUC is undefined with only one class present (" +
                               std::to_string(positives) + " positives, " +
                               std::to_string(negatives) + " negatives)");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks (1-based) of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1.0) ++pos_in_group;
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double LogLoss(std::span<const Real> scores, std::span<const Real> labels, double eps) {
  CheckLengths(scores, labels);
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double p = std::clamp(scores[k], eps, 1.0 - eps);
    total -= labels[k] * std::log(p) + (1.0 - labels[k]) * std::log1p(-p);
  }
  return total / static_cast<double>(scores.size());
}

}  // namespace dsgl
