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

#ifndef DSGL_MODEL_CHECKPOINT_H_
#define DSGL_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dsgl/model/model.h"

namespace dsgl {

// Binary layout, all integers little-endian:
//   "DSGLCKPT" | u32 version | u32 float bits (32 or 64) | u64 seed | u64 step
//   | u64 config length | config text (key=value lines)
//   | u64 block count | blocks
// block: u32 name length | name | u32 rank | u64 extent per axis | values
struct Checkpoint {
  ModelConfig config;
  ParamStore params;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  unsigned float_bits = 64;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(std::ostream& out, const DsglModel& model, std::uint64_t step,
                     unsigned float_bits = 64);
void SaveCheckpoint(const std::string& path, const DsglModel& model, std::uint64_t step,
                    unsigned float_bits = 64);

// Every block is checked against the shapes implied by the stored config;
// mismatches raise DimensionError, malformed files raise Error.
Checkpoint ReadCheckpoint(std::istream& in);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace dsgl

#endif  // DSGL_MODEL_CHECKPOINT_H_
