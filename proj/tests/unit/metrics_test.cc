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
#include <vector>

#include "dsgl/core/errors.h"
#include "dsgl/core/random.h"
#include "dsgl/metrics/metrics.h"
#include "support/auc_oracle.h"

namespace dsgl {
namespace {

using V = std::vector<Real>;

TEST(Auc, HandCases) {
  EXPECT_DOUBLE_EQ(Auc(V{0.9, 0.1}, V{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(Auc(V{0.8, 0.8, 0.6, 0.2}, V{1, 0, 1, 0}), 0.625);
  EXPECT_DOUBLE_EQ(Auc(V{0.3, 0.3, 0.3, 0.3, 0.3}, V{1, 0, 0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(Auc(V{0.1, 0.9}, V{1, 0}), 0.0);
}

TEST(Auc, SingleClassIsUndefined) {
  EXPECT_THROW(Auc(V{0.1, 0.2}, V{1, 1}), UndefinedMetricError);
  EXPECT_THROW(Auc(V{0.1}, V{0}), UndefinedMetricError);
  EXPECT_THROW(Auc(V{}, V{}), UndefinedMetricError);
  EXPECT_THROW(Auc(V{0.1, 0.2}, V{1}), ValueError);
  EXPECT_THROW(Auc(V{NAN, 0.2}, V{1, 0}), ValueError);
}

// Random sets with scores drawn from a small grid so ties are frequent.
void RandomSet(Rng& rng, V& scores, V& labels) {
  const std::size_t n = 2 + rng.UniformIndex(99);
  scores.assign(n, 0.0);
  labels.assign(n, 0.0);
  const std::size_t levels = 1 + rng.UniformIndex(10);
  for (std::size_t k = 0; k < n; ++k) {
    scores[k] = static_cast<double>(rng.UniformIndex(levels)) / 10.0 + 0.01;
    labels[k] = rng.Bernoulli(0.4) ? 1.0 : 0.0;
  }
  labels[0] = 1.0;
  labels[1] = 0.0;
}

TEST(Auc, MatchesPairwiseOracle) {
  Rng rng(100);
  for (int trial = 0; trial < 200; ++trial) {
    V scores, labels;
    RandomSet(rng, scores, labels);
    EXPECT_NEAR(Auc(scores, labels), testing::PairwiseAuc(scores, labels), 1e-12);
  }
}

TEST(Auc, InvariantUnderIncreasingTransform) {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    V scores, labels;
    RandomSet(rng, scores, labels);
    V moved = scores;
    for (auto& s : moved) s = std::exp(3.0 * s) - 7.0;
    EXPECT_NEAR(Auc(scores, labels), Auc(moved, labels), 1e-12);
  }
}

TEST(Auc, LabelFlipGivesComplement) {
  Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    V scores, labels;
    RandomSet(rng, scores, labels);
    V flipped = labels;
    for (auto& y : flipped) y = 1.0 - y;
    EXPECT_NEAR(Auc(scores, flipped), 1.0 - Auc(scores, labels), 1e-12);
  }
}

TEST(LogLoss, HandCases) {
  EXPECT_NEAR(LogLoss(V{0.5}, V{1}), 0.693147180559945, 1e-9);
  EXPECT_NEAR(LogLoss(V{1.0}, V{1}), -std::log(1.0 - 1e-7), 1e-9);
  EXPECT_NEAR(LogLoss(V{1.0}, V{1}), 1e-7, 1e-9);
  EXPECT_NEAR(LogLoss(V{0.9, 0.1}, V{1, 0}), 0.105360515657826, 1e-9);
  EXPECT_NEAR(LogLoss(V{0.0}, V{1}), -std::log(1e-7), 1e-9);
  EXPECT_EQ(LogLoss(V{}, V{}), 0.0);
}

}  // namespace
}  // namespace dsgl
