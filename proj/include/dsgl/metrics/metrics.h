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

#ifndef DSGL_METRICS_METRICS_H_
#define DSGL_METRICS_METRICS_H_

#include <span>

#include "dsgl/core/tensor.h"

namespace dsgl {

// Area under the ROC curve as the Mann-Whitney statistic; tied scores earn
// half credit. O(n log n). Throws UndefinedMetricError unless both labels
// occur, ValueError on non-finite scores or mismatched lengths.
double Auc(std::span<const Real> scores, std::span<const Real> labels);

// Mean binary cross-entropy with predictions clipped to [eps, 1 - eps].
// Returns 0 for empty input.
double LogLoss(std::span<const Real> scores, std::span<const Real> labels,
               double eps = 1e-7);

}  // namespace dsgl

#endif  // DSGL_METRICS_METRICS_H_
