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

#ifndef CENSUS_DP_PRIVACY_BUDGET_H_
#define CENSUS_DP_PRIVACY_BUDGET_H_

#include <mutex>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace census_dp {

// (epsilon, delta) ledger under basic sequential composition. A spend is
// all-or-nothing: an overdraft leaves the totals untouched.
class PrivacyBudget {
 public:
  static constexpr double kEpsilonSlack = 1e-12;
  static constexpr double kDeltaSlack = 1e-15;

  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta);

  PrivacyBudget(const PrivacyBudget& other);
  PrivacyBudget& operator=(const PrivacyBudget& other);

  // Returns ResourceExhausted on overdraft, InvalidArgument on negative cost.
  absl::Status Spend(double epsilon_cost, double delta_cost);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  double spent_epsilon() const;
  double spent_delta() const;
  double remaining_epsilon() const;
  double remaining_delta() const;

 private:
  PrivacyBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}

  double epsilon_;
  double delta_;
  mutable std::mutex mu_;
  double spent_epsilon_ = 0.0;
  double spent_delta_ = 0.0;
};

}  // namespace census_dp

#endif  // CENSUS_DP_PRIVACY_BUDGET_H_
