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

#ifndef CENSUS_DP_CONSTRAINTS_H_
#define CENSUS_DP_CONSTRAINTS_H_

#include <cstdint>
#include <string>

#include "census_dp/query.h"

namespace census_dp {

// Violation counts for the three hierarchical constraints.
//   consistency:  one per (query, non-leaf node) whose children do not sum
//                 to it.
//   validity:     one per cell that is negative or non-integral.
//   faithfulness: one per (query, level >= 1) whose level sum differs from
//                 the root; plus one per query whose root differs from the
//                 true total when a truth table is supplied.
struct ConstraintReport {
  int64_t consistency = 0;
  int64_t validity = 0;
  int64_t faithfulness = 0;

  int64_t total() const { return consistency + validity + faithfulness; }
  bool ok() const { return total() == 0; }

  ConstraintReport& operator+=(const ConstraintReport& other) {
    consistency += other.consistency;
    validity += other.validity;
    faithfulness += other.faithfulness;
    return *this;
  }
  bool operator==(const ConstraintReport&) const = default;
};

ConstraintReport ValidateConstraints(const AnswerTable& table);
// Also requires each query's root to equal the true root total.
ConstraintReport ValidateConstraints(const AnswerTable& table,
                                     const AnswerTable& truth);

std::string ConstraintReportToJson(const ConstraintReport& report);

}  // namespace census_dp

#endif  // CENSUS_DP_CONSTRAINTS_H_
