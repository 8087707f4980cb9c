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

#ifndef CENSUS_DP_SRC_HPD_INTERNAL_H_
#define CENSUS_DP_SRC_HPD_INTERNAL_H_

#include <span>

#include "absl/status/status.h"
#include "census_dp/hpd.h"

namespace census_dp {
namespace hpd_internal {

// Same shapes as model.params, all zero.
HpdParameters ZeroParameters(const HpdModel& model);

// Fails on a measurement whose query or node is out of range.
absl::Status CheckMeasurements(const HpdModel& model, const QuerySet& queries,
                               std::span<const Measurement> log);

// Adds the gradient of ((model_answer - noisy) / n_total)^2 for one
// measurement into `gradient`.
void AccumulateGradient(const HpdModel& model, const MarginalQuery& query,
                        int node, double noisy_answer, double n_total,
                        HpdParameters& gradient);

void AddInto(const HpdParameters& term, HpdParameters& total);

}  // namespace hpd_internal
}  // namespace census_dp

#endif  // CENSUS_DP_SRC_HPD_INTERNAL_H_
