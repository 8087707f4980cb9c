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

#include "census_dp/hpd.h"
#include "census_dp/status_macros.h"
#include "../hpd_internal.h"

namespace census_dp {
namespace reference {

absl::StatusOr<HpdParameters> LossGradient(const HpdModel& model,
                                           const QuerySet& queries,
                                           std::span<const Measurement> log,
                                           double n_total) {
  RETURN_IF_ERROR(hpd_internal::CheckMeasurements(model, queries, log));
  HpdParameters gradient = hpd_internal::ZeroParameters(model);
  for (const Measurement& m : log) {
    hpd_internal::AccumulateGradient(model, queries[m.query], m.node,
                                     m.noisy_answer, n_total, gradient);
  }
  return gradient;
}

}  // namespace reference
}  // namespace census_dp
