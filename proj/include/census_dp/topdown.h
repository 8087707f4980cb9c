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

#ifndef CENSUS_DP_TOPDOWN_H_
#define CENSUS_DP_TOPDOWN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "census_dp/privacy_budget.h"
#include "census_dp/query.h"

namespace census_dp {

struct TopDownConfig {
  double epsilon = 1.0;
  uint64_t seed = 0;
};

// Answer table after noise injection: real-valued, possibly negative.
class NoisyAnswerTable {
 public:
  explicit NoisyAnswerTable(AnswerTable table) : table_(std::move(table)) {}

  const AnswerTable& table() const { return table_; }
  AnswerTable& mutable_table() { return table_; }

 private:
  AnswerTable table_;
};

// Double-geometric scale used for every cell: 2 * num_levels / epsilon.
double TopDownNoiseScale(int num_levels, double epsilon);

// Adds independent double-geometric noise at TopDownNoiseScale to every cell,
// at every level including the root. Query q draws from a sub-stream of
// config.seed keyed by q; the result is independent of thread count.
absl::StatusOr<NoisyAnswerTable> AddNoise(const AnswerTable& truth,
                                          const TopDownConfig& config);

// L2 projection of sibling values onto {x >= 0, sum(x) = parent_value}.
std::vector<double> ProjectChildren(std::span<const double> noisy_children,
                                    double parent_value);

// Largest-remainder rounding: floor every value, then hand the remaining
// units to the largest fractional parts (ties to the lower index). If the
// floors already overshoot the target, units are taken back from the
// smallest fractional parts among positive entries. Fails when
// |sum(values) - target_sum| >= values.size() or any value is negative.
absl::StatusOr<std::vector<int64_t>> RoundPreservingSum(
    std::span<const double> values, int64_t target_sum);

// The post-processing half of TopDown. Per query, the root is pinned to the
// true total from `truth`; each level is then finalized top-down by
// projecting every sibling group onto its finalized parent and rounding.
// Parallel across queries.
absl::StatusOr<AnswerTable> PostProcess(const NoisyAnswerTable& noisy,
                                        const AnswerTable& truth);

// AddNoise followed by PostProcess. When `ledger` is non-null the full
// epsilon is charged to it before any noise is drawn.
absl::StatusOr<AnswerTable> RunTopDown(const AnswerTable& truth,
                                       const TopDownConfig& config,
                                       PrivacyBudget* ledger = nullptr);

namespace reference {

absl::StatusOr<AnswerTable> PostProcess(const NoisyAnswerTable& noisy,
                                        const AnswerTable& truth);

}  // namespace reference

}  // namespace census_dp

#endif  // CENSUS_DP_TOPDOWN_H_
