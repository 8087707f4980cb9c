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

#ifndef CENSUS_DP_SIMPLEX_H_
#define CENSUS_DP_SIMPLEX_H_

#include <span>
#include <vector>

namespace census_dp {

// Euclidean projection of `point` onto {x >= 0, sum(x) = total} by the
// active-set iteration: shift the active coordinates by a common constant to
// meet the sum, drop the ones that went negative, repeat. Terminates in at
// most point.size() passes. Requires total >= 0 and a non-empty point.
std::vector<double> ProjectOntoScaledSimplex(std::span<const double> point,
                                             double total);

// In-place Euclidean projection onto the probability simplex using the
// sort-and-threshold algorithm.
void ProjectOntoProbabilitySimplex(std::span<double> point);

}  // namespace census_dp

#endif  // CENSUS_DP_SIMPLEX_H_
