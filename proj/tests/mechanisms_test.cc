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

#include <cmath>
#include <map>
#include <numeric>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "census_dp/random.h"
#include "test_util.h"

namespace census_dp {
namespace {

using ::census_dp::testing::StatusIs;

// Analytic pmf from an explicit normalization over |k| <= 200.
double GeometricOracle(double scale, int64_t k) {
  const double alpha = std::exp(-1.0 / scale);
  double norm = 0;
  for (int j = -200; j <= 200; ++j) norm += std::pow(alpha, std::abs(j));
  return std::pow(alpha, std::abs(k)) / norm;
}

TEST(RandomSourceTest, SameSeedSameSequence) {
  RandomSource a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs = differs || x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RandomSourceTest, SubstreamsAreStableAndDistinct) {
  RandomSource root(7);
  RandomSource s1 = root.Substream("topdown");
  RandomSource s2 = root.Substream("topdown");
  RandomSource s3 = root.Substream("mst");
  RandomSource s4 = root.Substream(uint64_t{3});
  EXPECT_EQ(s1.NextU64(), s2.NextU64());
  EXPECT_NE(s1.seed(), s3.seed());
  EXPECT_NE(s3.seed(), s4.seed());
  // Deriving a sub-stream does not advance the parent.
  RandomSource fresh(7);
  EXPECT_EQ(root.NextU64(), fresh.NextU64());
}

TEST(RandomSourceTest, UniformOpenStaysInsideUnitInterval) {
  RandomSource rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.UniformOpen();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(DoubleGeometricTest, RejectsNonPositiveScale) {
  EXPECT_THAT(DoubleGeometricMechanism::Create(0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DoubleGeometricMechanism::Create(-1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DoubleGeometricTest, ZeroMassAtScaleFour) {
  DoubleGeometricMechanism mech = DoubleGeometricMechanism::Create(4.0).value();
  const double expected = (1 - std::exp(-0.25)) / (1 + std::exp(-0.25));
  EXPECT_NEAR(mech.Pmf(0), expected, 1e-15);
  EXPECT_NEAR(mech.Pmf(0), 0.1243, 1e-4);
  for (int k = -10; k <= 10; ++k) {
    EXPECT_NEAR(mech.Pmf(k), GeometricOracle(4.0, k), 1e-12) << k;
  }
}

TEST(DoubleGeometricTest, EmpiricalPmfMatchesAnalytic) {
  DoubleGeometricMechanism mech = DoubleGeometricMechanism::Create(4.0).value();
  RandomSource rng(2024);
  const int draws = 1000000;
  std::map<int64_t, int> counts;
  double sum = 0;
  for (int i = 0; i < draws; ++i) {
    const int64_t k = mech.Sample(rng);
    ++counts[k];
    sum += k;
  }
  EXPECT_LE(std::abs(sum / draws), 0.05);
  double tvd = 0;
  double covered = 0;
  for (int64_t k = -200; k <= 200; ++k) {
    const double empirical =
        counts.contains(k) ? static_cast<double>(counts[k]) / draws : 0.0;
    tvd += std::abs(empirical - mech.Pmf(k));
    covered += mech.Pmf(k);
  }
  tvd += 1.0 - covered;
  EXPECT_LE(0.5 * tvd, 0.005);
  // Symmetry within 3 binomial standard deviations.
  for (int k = 1; k <= 5; ++k) {
    const double p = mech.Pmf(k);
    const double sigma = std::sqrt(2.0 * draws * p * (1 - p));
    EXPECT_LE(std::abs(counts[k] - counts[-k]), 3 * sigma) << k;
  }
}

TEST(DoubleGeometricTest, DeterministicInRngState) {
  DoubleGeometricMechanism mech = DoubleGeometricMechanism::Create(2.5).value();
  RandomSource a(5), b(5);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(mech.Sample(a), mech.Sample(b));
}

TEST(GaussianTest, SigmaFormula) {
  EXPECT_NEAR(GaussianSigma(1.0, 1.0, 1e-6).value(), 5.2989, 1e-4);
  EXPECT_NEAR(GaussianSigma(2.0, 1.0, 1e-6).value(),
              2 * GaussianSigma(1.0, 1.0, 1e-6).value(), 1e-12);
  EXPECT_THAT(GaussianSigma(1.0, 0.0, 1e-6),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(GaussianSigma(1.0, 1.0, 0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(GaussianSigma(1.0, 1.0, 1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(GaussianTest, SampleVarianceMatchesSigma) {
  GaussianMechanism mech = GaussianMechanism::Create(1.0, 1.0, 1e-6).value();
  RandomSource rng(77);
  const int draws = 1000000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = mech.SampleNoise(rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / draws;
  const double variance = sum_sq / draws - mean * mean;
  const double sigma2 = mech.sigma() * mech.sigma();
  EXPECT_LE(std::abs(variance - sigma2) / sigma2, 0.02);
  EXPECT_LE(std::abs(mean), 5 * mech.sigma() / std::sqrt(draws));
}

std::vector<double> Frequencies(std::span<const double> scores, double epsilon,
                                int draws, uint64_t seed) {
  RandomSource rng(seed);
  std::vector<double> freq(scores.size(), 0.0);
  for (int i = 0; i < draws; ++i) {
    freq[ExponentialMechanism(scores, 1.0, epsilon, rng).value()] += 1.0 / draws;
  }
  return freq;
}

TEST(ExponentialMechanismTest, EqualScoresAreFair) {
  const double scores[] = {3.0, 3.0};
  std::vector<double> freq = Frequencies(scores, 1.0, 100000, 1);
  EXPECT_NEAR(freq[0], 0.5, 0.01);
}

TEST(ExponentialMechanismTest, ClosedFormNineToOne) {
  // epsilon * s / 2 = ln 9 with epsilon = 1.
  const double scores[] = {0.0, 2.0 * std::log(9.0)};
  std::vector<double> probs =
      ExponentialMechanismProbabilities(scores, 1.0, 1.0).value();
  EXPECT_NEAR(probs[1], 0.9, 1e-12);
  std::vector<double> freq = Frequencies(scores, 1.0, 100000, 2);
  EXPECT_NEAR(freq[1], 0.9, 0.01);
}

TEST(ExponentialMechanismTest, LargeEpsilonPicksArgmax) {
  const double scores[] = {0.3, 1.7, 1.2, -4.0};
  RandomSource rng(3);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_EQ(ExponentialMechanism(scores, 1.0, 1e6, rng).value(), 1u);
  }
}

TEST(ExponentialMechanismTest, RejectsEmptyCandidates) {
  RandomSource rng(1);
  EXPECT_THAT(ExponentialMechanism({}, 1.0, 1.0, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ExponentialMechanismTest, StableForHugeScores) {
  const double scores[] = {1e300, 1e300 - 1e290, 0.0};
  std::vector<double> probs =
      ExponentialMechanismProbabilities(scores, 1.0, 1.0).value();
  for (double p : probs) EXPECT_TRUE(std::isfinite(p));
  EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
}

TEST(ExponentialMechanismPropertyTest, EmpiricalMatchesSoftmax) {
  RandomSource gen(99);
  for (int trial = 0; trial < 5; ++trial) {
    const int size = 2 + static_cast<int>(gen.UniformInt(9));
    std::vector<double> scores(size);
    for (double& s : scores) s = 6.0 * gen.UniformOpen();
    std::vector<double> analytic =
        ExponentialMechanismProbabilities(scores, 1.0, 1.0).value();
    std::vector<double> freq = Frequencies(scores, 1.0, 100000, 100 + trial);
    double tvd = 0;
    for (int i = 0; i < size; ++i) tvd += std::abs(freq[i] - analytic[i]);
    EXPECT_LE(0.5 * tvd, 0.01) << "trial " << trial;
  }
}

}  // namespace
}  // namespace census_dp
