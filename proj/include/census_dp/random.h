//
// Copyright 2026 The Census DP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef CENSUS_DP_RANDOM_H_
#define CENSUS_DP_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace census_dp {

// Seeded pseudo-random stream. Identical seeds give identical draw
// sequences. Independent sub-streams are derived by hashing the parent seed
// with a stream id, so a worker can own a stream for any (algorithm,
// repetition, chunk) tuple without coordinating with other workers.
//
// Not thread-safe; give each worker its own instance.
class RandomSource {
 public:
  using Engine = std::mt19937_64;

  explicit RandomSource(uint64_t seed);

  uint64_t seed() const { return seed_; }

  // Deterministic function of (seed(), stream_id). Does not advance *this.
  RandomSource Substream(uint64_t stream_id) const;
  RandomSource Substream(std::string_view label) const;

  uint64_t NextU64() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double UniformOpen();
  // Uniform integer in [0, bound).
  uint64_t UniformInt(uint64_t bound);
  double StandardNormal();
  // Index drawn with probability proportional to weights[i]. Weights must be
  // non-negative with a positive sum.
  size_t Categorical(std::span<const double> weights);

  Engine& engine() { return engine_; }

 private:
  uint64_t seed_;
  Engine engine_;
};

// SplitMix64 finalizer; used for seed derivation.
uint64_t MixSeed(uint64_t x);

}  // namespace census_dp

#endif  // CENSUS_DP_RANDOM_H_
