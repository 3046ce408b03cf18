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

#include "dsgl/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dsgl/core/errors.h"

namespace dsgl {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'G', 'L', 'C', 'K', 'P', 'T'};
// Guards allocations driven by header fields of damaged files.
constexpr std::uint64_t kMaxConfigBytes = 1 << 20;
constexpr std::uint32_t kMaxNameBytes = 4096;

template <typename U>
void PutLe(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t k = 0; k < sizeof(U); ++k) {
    bytes[k] = static_cast<char>((value >> (8 * k)) & 0xff);
  }
  out.write(bytes, sizeof(U));
}

template <typename U>
U GetLe(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(std::string("checkpoint truncated while reading ") + what);
  }
  U value = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) value |= static_cast<U>(bytes[k]) << (8 * k);
  return value;
}

}  // namespace

void WriteCheckpoint(std::ostream& out, const DsglModel& model, std::uint64_t step,
                     unsigned float_bits) {
  if (float_bits != 32 && float_bits != 64) {
    throw ValueError("checkpoint float width must be 32 or 64");
  }
  out.write(kMagic, sizeof(kMagic));
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint32_t>(out, float_bits);
  PutLe<std::uint64_t>(out, model.config().seed);
  PutLe<std::uint64_t>(out, step);
  const std::string text = ModelConfigToText(model.config());
  PutLe<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const ParamStore& params = model.params();
  PutLe<std::uint64_t>(out, params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::string& name = params.names()[k];
    const Tensor& t = params.tensors()[k];
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) PutLe<std::uint64_t>(out, d);
    for (Real v : t.data()) {
      if (float_bits == 64) PutLe(out, std::bit_cast<std::uint64_t>(v));
      else PutLe(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (!out) throw Error("failed writing checkpoint");
}

void SaveCheckpoint(const std::string& path, const DsglModel& model, std::uint64_t step,
                    unsigned float_bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  WriteCheckpoint(out, model, step, float_bits);
}

Checkpoint ReadCheckpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a checkpoint file (bad magic)");
  }
  const auto version = GetLe<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.float_bits = GetLe<std::uint32_t>(in, "float width");
  if (ck.float_bits != 32 && ck.float_bits != 64) {
    throw Error("bad checkpoint float width " + std::to_string(ck.float_bits));
  }
  ck.seed = GetLe<std::uint64_t>(in, "seed");
  ck.step = GetLe<std::uint64_t>(in, "step");
  const auto config_len = GetLe<std::uint64_t>(in, "config length");
  if (config_len > kMaxConfigBytes) throw Error("checkpoint config block too large");
  std::string text(config_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(config_len))) {
    throw Error("checkpoint truncated in config block");
  }
  ck.config = ModelConfigFromText(text);
  // Expected names and shapes come from a freshly laid-out store.
  ParamStore expected = InitParams(ck.config);
  const auto count = GetLe<std::uint64_t>(in, "block count");
  if (count != expected.size()) {
    throw DimensionError("checkpoint has " + std::to_string(count) + " parameter blocks, config implies " +
                         std::to_string(expected.size()));
  }
  for (std::size_t k = 0; k < count; ++k) {
    const auto name_len = GetLe<std::uint32_t>(in, "name length");
    if (name_len > kMaxNameBytes) throw Error("checkpoint parameter name too long");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw Error("checkpoint truncated in block name");
    if (name != expected.names()[k]) {
      throw DimensionError("checkpoint block " + std::to_string(k) + " is '" + name + "', expected '" +
                           expected.names()[k] + "'");
    }
    const auto rank = GetLe<std::uint32_t>(in, "rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank && d < 8; ++d) {
      shape.push_back(static_cast<std::size_t>(GetLe<std::uint64_t>(in, "extent")));
    }
    Tensor target = expected.tensors()[k];
    if (rank > 8 || shape != target.shape()) {
      throw DimensionError("parameter '" + name + "' has shape " + ShapeToString(shape) +
                           " in checkpoint, config requires " + ShapeToString(target.shape()));
    }
    for (Real& v : target.mutable_data()) {
      v = ck.float_bits == 64 ? std::bit_cast<double>(GetLe<std::uint64_t>(in, "values"))
                              : static_cast<double>(std::bit_cast<float>(GetLe<std::uint32_t>(in, "values")));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes after checkpoint");
  ck.params = std::move(expected);
  return ck;
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(in);
}

}  // namespace dsgl
