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

#include <cstring>
#include <sstream>

#include "dsgl/core/errors.h"
#include "dsgl/model/checkpoint.h"
#include "support/model_fixture.h"

namespace dsgl {
namespace {

std::string Serialize(const DsglModel& model, unsigned bits = 64) {
  std::ostringstream out(std::ios::binary);
  WriteCheckpoint(out, model, 42, bits);
  return out.str();
}

Checkpoint Deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return ReadCheckpoint(in);
}

TEST(ModelConfigText, RoundTrip) {
  ModelConfig c = testing::TinyConfig(3);
  c.ablation.no_time = c.ablation.no_lc = true;
  c.attn_scale_outside = true;
  c.loss_reduction = Reduction::kSum;
  c.seed = 99;
  const ModelConfig back = ModelConfigFromText(ModelConfigToText(c));
  EXPECT_EQ(ModelConfigToText(back), ModelConfigToText(c));
  EXPECT_EQ(back.ablation, c.ablation);
  EXPECT_EQ(back.dsg.user_fanouts, c.dsg.user_fanouts);
  EXPECT_THROW(ModelConfigFromText("bogus=1\n"), ValueError);
  EXPECT_THROW(ModelConfigFromText("hidden=abc\n"), ValueError);
  EXPECT_THROW(ModelConfigFromText("user_fanouts=3,x\n"), ValueError);
}

TEST(Checkpoint, RoundTrip64IsExact) {
  const DsglModel model(testing::TinyConfig(2));
  const Checkpoint ck = Deserialize(Serialize(model));
  EXPECT_EQ(ck.step, 42u);
  EXPECT_EQ(ck.seed, model.config().seed);
  EXPECT_EQ(ck.float_bits, 64u);
  ASSERT_EQ(ck.params.size(), model.params().size());
  for (std::size_t k = 0; k < ck.params.size(); ++k) {
    const auto a = ck.params.tensors()[k].data();
    const auto b = model.params().tensors()[k].data();
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(Real)), 0) << ck.params.names()[k];
  }
}

TEST(Checkpoint, RoundTrip32Rounds) {
  const DsglModel model(testing::TinyConfig(2));
  const std::string bytes = Serialize(model, 32);
  EXPECT_LT(bytes.size(), Serialize(model, 64).size());
  const Checkpoint ck = Deserialize(bytes);
  EXPECT_EQ(ck.float_bits, 32u);
  for (std::size_t k = 0; k < ck.params.size(); ++k) {
    const auto a = ck.params.tensors()[k].data();
    const auto b = model.params().tensors()[k].data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i], static_cast<double>(static_cast<float>(b[i])));
    }
  }
}

TEST(Checkpoint, ShapeMismatchIsRejected) {
  const DsglModel model(testing::TinyConfig(2));
  std::string bytes = Serialize(model);
  const auto at = bytes.find("hidden=6");
  ASSERT_NE(at, std::string::npos);
  bytes[at + 7] = '4';
  EXPECT_THROW(Deserialize(bytes), DimensionError);
}

TEST(Checkpoint, DamagedFilesAreRejected) {
  const DsglModel model(testing::TinyConfig(2));
  const std::string bytes = Serialize(model);
  EXPECT_THROW(Deserialize(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_THROW(Deserialize(bytes + "x"), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(Deserialize(bad), Error);
  EXPECT_THROW(Deserialize(""), Error);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/ck.bin"), Error);
}

}  // namespace
}  // namespace dsgl
