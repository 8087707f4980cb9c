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

#include "census_dp/privacy_budget.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace census_dp {

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("budget epsilon must be positive, got %g", epsilon));
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("budget delta must lie in [0, 1), got %g", delta));
  }
  return PrivacyBudget(epsilon, delta);
}

PrivacyBudget::PrivacyBudget(const PrivacyBudget& other)
    : epsilon_(other.epsilon_), delta_(other.delta_) {
  std::lock_guard<std::mutex> lock(other.mu_);
  spent_epsilon_ = other.spent_epsilon_;
  spent_delta_ = other.spent_delta_;
}

PrivacyBudget& PrivacyBudget::operator=(const PrivacyBudget& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  epsilon_ = other.epsilon_;
  delta_ = other.delta_;
  spent_epsilon_ = other.spent_epsilon_;
  spent_delta_ = other.spent_delta_;
  return *this;
}

absl::Status PrivacyBudget::Spend(double epsilon_cost, double delta_cost) {
  if (!(epsilon_cost >= 0.0) || !(delta_cost >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "privacy costs must be non-negative, got (%g, %g)", epsilon_cost,
        delta_cost));
  }
  std::lock_guard<std::mutex> lock(mu_);
  const double new_epsilon = spent_epsilon_ + epsilon_cost;
  const double new_delta = spent_delta_ + delta_cost;
  if (new_epsilon > epsilon_ + kEpsilonSlack ||
      new_delta > delta_ + kDeltaSlack) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "privacy budget exceeded: spending (%.17g, %.17g) on top of "
        "(%.17g, %.17g) exceeds budget (%.17g, %.17g)",
        epsilon_cost, delta_cost, spent_epsilon_, spent_delta_, epsilon_,
        delta_));
  }
  spent_epsilon_ = new_epsilon;
  spent_delta_ = new_delta;
  return absl::OkStatus();
}

double PrivacyBudget::spent_epsilon() const {
  std::lock_guard<std::mutex> lock(mu_);
  return spent_epsilon_;
}

double PrivacyBudget::spent_delta() const {
  std::lock_guard<std::mutex> lock(mu_);
  return spent_delta_;
}

double PrivacyBudget::remaining_epsilon() const {
  std::lock_guard<std::mutex> lock(mu_);
  return std::max(0.0, epsilon_ - spent_epsilon_);
}

double PrivacyBudget::remaining_delta() const {
  std::lock_guard<std::mutex> lock(mu_);
  return std::max(0.0, delta_ - spent_delta_);
}

}  // namespace census_dp
