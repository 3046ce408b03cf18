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

#ifndef DSGL_CORE_RANDOM_H_
#define DSGL_CORE_RANDOM_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dsgl {

// Mixes a seed with a stream id so independent consumers of one global seed
// (per-parameter init, per-epoch shuffles) draw unrelated sequences.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

// Seeded generator whose draws depend only on the seed, not on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  // Uniform on [0, n); n must be positive.
  std::uint64_t UniformIndex(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform01() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[UniformIndex(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsgl

#endif  // DSGL_CORE_RANDOM_H_
