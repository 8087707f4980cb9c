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

#ifndef CENSUS_DP_MECHANISMS_H_
#define CENSUS_DP_MECHANISMS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "census_dp/random.h"

namespace census_dp {

// Two-sided geometric noise: P(k) = (1 - a) / (1 + a) * a^|k| with
// a = exp(-1 / scale). Sampled as the difference of two geometric draws with
// success probability 1 - a.
class DoubleGeometricMechanism {
 public:
  static absl::StatusOr<DoubleGeometricMechanism> Create(double scale);

  double scale() const { return scale_; }
  int64_t Sample(RandomSource& rng) const;
  // Analytic probability mass at k.
  double Pmf(int64_t k) const;

 private:
  explicit DoubleGeometricMechanism(double scale) : scale_(scale) {}

  int64_t SampleGeometric(RandomSource& rng) const;

  double scale_;
};

// Classic (epsilon, delta) Gaussian mechanism,
// sigma = sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon.
class GaussianMechanism {
 public:
  static absl::StatusOr<GaussianMechanism> Create(double sensitivity,
                                                  double epsilon, double delta);

  double sigma() const { return sigma_; }
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  double SampleNoise(RandomSource& rng) const;

 private:
  GaussianMechanism(double sigma, double epsilon, double delta)
      : sigma_(sigma), epsilon_(epsilon), delta_(delta) {}

  double sigma_;
  double epsilon_;
  double delta_;
};

absl::StatusOr<double> GaussianSigma(double sensitivity, double epsilon,
                                     double delta);

// Selection probabilities exp(eps * score_i / (2 * sensitivity)), normalized
// after shifting by the maximum score.
absl::StatusOr<std::vector<double>> ExponentialMechanismProbabilities(
    std::span<const double> scores, double sensitivity, double epsilon);

// Returns the selected candidate index.
absl::StatusOr<size_t> ExponentialMechanism(std::span<const double> scores,
                                            double sensitivity, double epsilon,
                                            RandomSource& rng);

}  // namespace census_dp

#endif  // CENSUS_DP_MECHANISMS_H_
