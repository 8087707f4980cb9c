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

#include "census_dp/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace census_dp {

absl::StatusOr<DoubleGeometricMechanism> DoubleGeometricMechanism::Create(
    double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("double-geometric scale must be positive and finite, got ",
                     scale));
  }
  return DoubleGeometricMechanism(scale);
}

int64_t DoubleGeometricMechanism::SampleGeometric(RandomSource& rng) const {
  // Inverse CDF: P(G >= j) = a^j = exp(-j / scale), so G = floor(-scale ln U).
  const double g = std::floor(-scale_ * std::log(rng.UniformOpen()));
  if (g >= static_cast<double>(std::numeric_limits<int64_t>::max() / 2)) {
    return std::numeric_limits<int64_t>::max() / 2;
  }
  return static_cast<int64_t>(g);
}

int64_t DoubleGeometricMechanism::Sample(RandomSource& rng) const {
  const int64_t a = SampleGeometric(rng);
  const int64_t b = SampleGeometric(rng);
  return a - b;
}

double DoubleGeometricMechanism::Pmf(int64_t k) const {
  const double alpha = std::exp(-1.0 / scale_);
  const double norm = -std::expm1(-1.0 / scale_) / (1.0 + alpha);
  return norm * std::exp(-static_cast<double>(k < 0 ? -k : k) / scale_);
}

absl::StatusOr<double> GaussianSigma(double sensitivity, double epsilon,
                                     double delta) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity must be positive, got ", sensitivity));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

absl::StatusOr<GaussianMechanism> GaussianMechanism::Create(double sensitivity,
                                                            double epsilon,
                                                            double delta) {
  absl::StatusOr<double> sigma = GaussianSigma(sensitivity, epsilon, delta);
  if (!sigma.ok()) return sigma.status();
  return GaussianMechanism(*sigma, epsilon, delta);
}

double GaussianMechanism::SampleNoise(RandomSource& rng) const {
  return sigma_ * rng.StandardNormal();
}

absl::StatusOr<std::vector<double>> ExponentialMechanismProbabilities(
    std::span<const double> scores, double sensitivity, double epsilon) {
  if (scores.empty()) {
    return absl::InvalidArgumentError(
        "exponential mechanism needs at least one candidate");
  }
  if (!(sensitivity > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity must be positive, got ", sensitivity));
  }
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  double max_score = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) {
      return absl::InvalidArgumentError("scores must be finite");
    }
    max_score = std::max(max_score, s);
  }
  std::vector<double> weights(scores.size());
  double total = 0.0;
  const double factor = epsilon / (2.0 * sensitivity);
  for (size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(factor * (scores[i] - max_score));
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

absl::StatusOr<size_t> ExponentialMechanism(std::span<const double> scores,
                                            double sensitivity, double epsilon,
                                            RandomSource& rng) {
  absl::StatusOr<std::vector<double>> probabilities =
      ExponentialMechanismProbabilities(scores, sensitivity, epsilon);
  if (!probabilities.ok()) return probabilities.status();
  return rng.Categorical(*probabilities);
}

}  // namespace census_dp
